#pragma once

// Experiment configuration in YAML. A file describes one or more panels,
// each a (system, objective, optimizer) triple, sharing the noise, analysis
// and output blocks. Top-level system / objective / optimizer entries act as
// defaults for panels; without a `panels` list they form a single panel.
// Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "moqc/dmorph.hpp"
#include "moqc/fronts.hpp"
#include "moqc/table_io.hpp"

namespace moqc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0);
  const std::string& field() const { return field_; }
  /// 1-based; 0 when not tied to a line.
  int line() const { return line_; }

 private:
  std::string field_;
  int line_ = 0;
};

enum class Method { DMorph, MonteCarlo, Moea, Surface };

const char* to_string(Method m);

struct ObjectiveConfig {
  std::string kind = "state_transfer";  // state_transfer | observable | gate
  int from = 1;
  int to = 2;
  std::string observable = "sigma_x";
  std::string gate = "hadamard";  // hadamard | cnot
  GatePhase phase = GatePhase::SpecialUnitary;

  Objective build(const SpinSystem& sys) const;
};

struct OptimizerConfig {
  std::vector<Method> methods{Method::MonteCarlo};
  int n_runs = 10;
  InitSampler init = InitSampler::low_fluence();
  FlowConfig flow;
  int population = 100;
  int generations = 0;  // 0: MoeaConfig::default_generations
  double initial_step = 0.1;
  bool full_covariance = false;
  int history_stride = 10;

  bool has(Method m) const;
};

struct NoiseConfig {
  CorrelationKernel::Form form = CorrelationKernel::Form::ExpDecay;
  double a2 = 1e-4;
  // First entry is the reference kernel; the rest are re-engineered overlays.
  std::vector<double> alphas{1.0};
  std::vector<NoiseChannel> channels{NoiseChannel::Field, NoiseChannel::Detuning};
  Eigen::MatrixXd table;  // custom form

  CorrelationKernel kernel(std::size_t alpha_index = 0) const;
  /// One robustness secondary per (channel, alpha), then fluence.
  std::vector<SecondarySpec> secondaries() const;
  /// Name of the robustness secondary for a channel and alpha index.
  std::string secondary_name(NoiseChannel c, std::size_t alpha_index) const;
};

struct AnalysisConfig {
  std::optional<double> histogram_log10_e;
  int histogram_min_runs = 10;
  int bins_per_decade = 6;
  double e_max = 1e-1;
};

struct OutputConfig {
  std::string directory;  // empty: $MOQC_OUTPUT_DIR/<name>, else ./moqc-out/<name>
  Delimiter delimiter = Delimiter::Whitespace;
  bool plot_script = true;
  bool trajectories = true;
};

struct PanelConfig {
  std::string name;
  SpinSystem system;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  int threads = 1;
  NoiseConfig noise;
  AnalysisConfig analysis;
  OutputConfig output;
  std::vector<PanelConfig> panels;

  /// Cross-field checks (objective vs system size, methods vs system...).
  void validate() const;
};

/// `source` labels error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved form; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ExperimentConfig& cfg);

/// Directory of the shipped preset files, if it can be found.
std::optional<std::filesystem::path> preset_directory();
/// Loads `name` from the preset directory, or a path if `name` is one.
ExperimentConfig load_preset(const std::string& name);

}  // namespace moqc
