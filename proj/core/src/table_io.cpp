#include "moqc/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace moqc {

const char* to_string(Delimiter d) { return d == Delimiter::Comma ? "comma" : "whitespace"; }

Delimiter delimiter_from_string(const std::string& s) {
  if (s == "comma") return Delimiter::Comma;
  if (s == "whitespace") return Delimiter::Whitespace;
  throw TableError("unknown delimiter '" + s + "' (expected whitespace or comma)");
}

const char* table_extension(Delimiter d) { return d == Delimiter::Comma ? ".csv" : ".tsv"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw TableError("not a number: '" + s + "'");
  return v;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    if (c.empty() || c.find_first_of(" \t,\n") != std::string::npos) {
      throw TableError("column name must be non-empty without spaces or commas: '" + c + "'");
    }
  }
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw TableError("row width does not match header");
  std::vector<std::string> out;
  out.reserve(row.size());
  for (auto& c : row) {
    if (const double* d = std::get_if<double>(&c)) {
      out.push_back(format_number(*d));
    } else if (const long long* i = std::get_if<long long>(&c)) {
      out.push_back(std::to_string(*i));
    } else {
      std::string s = std::get<std::string>(std::move(c));
      if (s.empty() || s.find_first_of(" \t,\n") != std::string::npos) {
        throw TableError("text cell must be non-empty without spaces or commas: '" + s + "'");
      }
      out.push_back(std::move(s));
    }
  }
  rows_.push_back(std::move(out));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw TableError("no column '" + name + "'");
}

void Table::write(std::ostream& os, Delimiter d) const {
  const char sep = d == Delimiter::Comma ? ',' : '\t';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << sep;
      os << cells[i];
    }
    os << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

void Table::write(const std::filesystem::path& path, Delimiter d) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw TableError("cannot open " + path.string() + " for writing");
  write(os, d);
  if (!os) throw TableError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line, bool comma) {
  std::vector<std::string> out;
  if (comma) {
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    out.push_back(cur);
  } else {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
  }
  return out;
}

}  // namespace

Table Table::read(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw TableError("empty table");
  const bool comma = header.find(',') != std::string::npos;
  Table t(split(header, comma));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split(line, comma);
    if (cells.size() != t.columns_.size()) throw TableError("row width does not match header");
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

Table Table::read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TableError("cannot open " + path.string());
  return read(is);
}

}  // namespace moqc
