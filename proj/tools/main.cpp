// moqc run <config> | verify <suite> | front --merge <files...>
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 verification failures.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moqc/experiment.hpp"
#include "moqc/verify.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kVerify = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective quantum control toolkit"};
  app.require_subcommand(1);
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "override the configured seed");

  std::string config_path;
  std::optional<std::string> output;
  bool quiet = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment configuration or preset");
  run->add_option("config", config_path, "YAML file or preset name")->required();
  run->add_option("-o,--output", output, "output directory");
  run->add_flag("-q,--quiet", quiet, "no progress messages");

  std::string suite = "all";
  CLI::App* verify = app.add_subcommand("verify", "run built-in oracle checks");
  verify->add_option("suite", suite, "gradients | hessians | unitarity | kbeta-oracle | all");

  std::vector<std::string> merge_files;
  std::optional<std::string> merge_out;
  CLI::App* front = app.add_subcommand("front", "operate on front tables");
  front->add_option("--merge", merge_files, "front tables to merge")->required()->expected(1, -1);
  front->add_option("-o,--output", merge_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  if (*run) {
    moqc::ExperimentConfig cfg;
    try {
      cfg = moqc::load_preset(config_path);
    } catch (const moqc::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    }
    moqc::RunOptions opt;
    if (output) opt.output_directory = *output;
    opt.seed = seed;
    opt.threads = threads;
    if (!quiet) opt.log = &std::cerr;
    try {
      const moqc::ExperimentSummary sum = moqc::run_experiment(std::move(cfg), opt);
      std::cout << sum.directory.string() << "\n";
    } catch (const moqc::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kRuntime;
    }
    return kOk;
  }

  if (*verify) {
    try {
      const moqc::VerifyReport rep = moqc::run_verify(suite, seed.value_or(1), threads.value_or(1));
      rep.print(std::cout);
      return rep.passed() ? kOk : kVerify;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kRuntime;
    }
  }

  try {
    std::vector<std::filesystem::path> files(merge_files.begin(), merge_files.end());
    const moqc::Table merged = moqc::merge_fronts(files);
    const moqc::Delimiter d = merge_out && std::filesystem::path(*merge_out).extension() == ".csv"
                                  ? moqc::Delimiter::Comma
                                  : moqc::Delimiter::Whitespace;
    if (merge_out) {
      merged.write(std::filesystem::path(*merge_out), d);
    } else {
      merged.write(std::cout, d);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
