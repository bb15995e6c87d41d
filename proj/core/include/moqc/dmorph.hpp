#pragma once

// D-MORPH gradient flow: the time-sampled control evolves in a progress
// variable s as d eps_m / ds = dJ / d eps_m, integrated with an adaptive
// Dormand-Prince 4(5) scheme. Along the way the secondary objectives are
// recorded so their behaviour near the top of the landscape can be studied.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "moqc/dynamics.hpp"
#include "moqc/robustness.hpp"

namespace moqc {

struct SecondarySpec {
  enum class Kind { Robustness, Fluence };

  std::string name;
  Kind kind = Kind::Fluence;
  NoiseModel model;  // Robustness only

  static SecondarySpec robustness(std::string name, NoiseModel model);
  static SecondarySpec fluence(std::string name = "fluence");

  /// Robustness values improve toward zero from below; fluence improves downward.
  bool maximize() const { return kind == Kind::Robustness; }
};

/// K_eps, K_omega and fluence under one kernel, in the standard column order.
std::vector<SecondarySpec> standard_secondaries(const CorrelationKernel& kernel);

/// Secondary value for a field whose propagation is already known.
double evaluate_secondary(const SecondarySpec& spec, const Objective& obj, const SpinSystem& sys,
                          const ControlField& field, const PropagatorHistory& hist);

struct FlowConfig {
  double target_error = 1e-8;
  double s_max = 1e6;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int record_stride = 1;
  double stall_threshold = 1e-12;
  double initial_step = 1.0;
  long max_steps = 200000;

  void validate() const;
};

enum class FlowStatus { Converged, Stalled, SMaxReached, StepLimit, StepUnderflow };

const char* to_string(FlowStatus s);

struct TrajectorySample {
  double s = 0.0;
  double e_j = 1.0;
  double grad_norm = 0.0;
  std::vector<double> secondaries;
};

struct FieldSnapshot {
  double milestone = 0.0;  // first sample with e_j <= milestone
  double s = 0.0;
  double e_j = 0.0;
  ControlField field;
};

struct TrajectoryRecord {
  std::vector<std::string> secondary_names;
  std::vector<TrajectorySample> samples;
  std::vector<FieldSnapshot> snapshots;
  FlowStatus status = FlowStatus::StepLimit;
  bool converged = false;
  ControlField final_field;
  long accepted_steps = 0;
  long rejected_steps = 0;
  long gradient_evaluations = 0;
  double max_uphill = 0.0;  // largest observed drop in J over one accepted step
};

TrajectoryRecord flow(const Objective& obj, const SpinSystem& sys, const ControlField& initial,
                      const FlowConfig& cfg, std::span<const SecondarySpec> secondaries);

/// (s, gradient norm) along the recorded samples.
std::vector<std::pair<double, double>> gradient_norm_profile(const TrajectoryRecord& record);

/// Secondary `index` interpolated linearly in log10(E_J) at the first point the
/// run reaches `e_j`; empty if the run never gets there.
std::optional<double> secondary_at(const TrajectoryRecord& record, std::size_t index, double e_j);
/// Search parameter s at which the run first reaches `e_j`, same interpolation.
std::optional<double> s_at(const TrajectoryRecord& record, double e_j);

}  // namespace moqc
