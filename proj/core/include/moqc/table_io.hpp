#pragma once

// Plain-text tables: one header line, then rows. Numbers are written with
// 17 significant digits independent of locale, so a table read back holds the
// same doubles that were written.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace moqc {

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Delimiter { Whitespace, Comma };

const char* to_string(Delimiter d);
Delimiter delimiter_from_string(const std::string& s);
/// ".tsv" or ".csv".
const char* table_extension(Delimiter d);

std::string format_number(double v);
double parse_number(const std::string& s);

class Table {
 public:
  using Cell = std::variant<double, long long, std::string>;

  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  void add_row(std::vector<Cell> row);
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
  double number(std::size_t row, std::size_t col) const { return parse_number(cell(row, col)); }
  std::size_t column(const std::string& name) const;

  void write(std::ostream& os, Delimiter d) const;
  void write(const std::filesystem::path& path, Delimiter d) const;
  /// Comma-delimited if the header contains a comma, otherwise whitespace.
  static Table read(std::istream& is);
  static Table read(const std::filesystem::path& path);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace moqc
