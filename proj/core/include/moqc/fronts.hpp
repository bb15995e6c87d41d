#pragma once

// Ensembles of gradient-flow runs and the fronts built from them.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "moqc/dmorph.hpp"

namespace moqc {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrontPoint {
  double e_j = 1.0;
  std::vector<double> secondaries;
  int run_id = -1;
  double s = 0.0;
};

/// Which coordinate of a FrontPoint enters a dominance comparison.
/// secondary < 0 selects e_j.
struct Criterion {
  int secondary = -1;
  bool maximize = false;

  double value(const FrontPoint& p) const;
  /// Value in minimization form.
  double cost(const FrontPoint& p) const { return maximize ? -value(p) : value(p); }
};

/// e_j plus the given secondaries, each with its own sense.
std::vector<Criterion> criteria(std::span<const SecondarySpec> specs, std::span<const int> indices);

/// a dominates b: no worse in every criterion and strictly better in one.
bool dominates(const FrontPoint& a, const FrontPoint& b, std::span<const Criterion> crit);

/// Maximal mutually nondominated subset. Points with identical criterion
/// values are kept once (the first in input order). Output is ordered by
/// e_j, ties in input order.
std::vector<FrontPoint> nondominated_filter(std::span<const FrontPoint> points,
                                            std::span<const Criterion> crit);

struct InitSampler {
  AmplitudeRange range = AmplitudeRange::low_fluence();
  int n_modes = 0;  // 0: the system's frequency cap
  std::string regime = "low_fluence";

  static InitSampler low_fluence() { return {AmplitudeRange::low_fluence(), 0, "low_fluence"}; }
  static InitSampler high_fluence() { return {AmplitudeRange::high_fluence(), 0, "high_fluence"}; }
  ControlField sample(const SpinSystem& sys, std::uint64_t seed, std::size_t run) const;
};

/// Log-spaced fidelity-error grid, bins_per_decade points per decade from
/// e_max down to e_min inclusive.
struct EnvelopeGrid {
  double e_max = 1e-1;
  double e_min = 1e-8;
  int bins_per_decade = 6;

  std::vector<double> points() const;
};

struct Envelope {
  std::vector<double> e_j;
  std::vector<std::string> names;
  std::vector<bool> maximize;
  // values[secondary][bin]; empty when no run reached the bin.
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<int> contributors;  // runs reaching each bin
  std::vector<int> best_run;      // run supplying values[0][bin], -1 if none
};

Envelope envelope(std::span<const TrajectoryRecord> runs, std::span<const SecondarySpec> specs,
                  const EnvelopeGrid& grid);

struct EnsembleResult {
  std::vector<TrajectoryRecord> trajectories;
  std::vector<ControlField> initial_fields;
  std::vector<SecondarySpec> secondaries;
  Envelope envelope;
  std::string regime;
  int converged = 0;
};

EnsembleResult mc_ensemble(const Objective& obj, const SpinSystem& sys, int n_runs,
                           const InitSampler& init, const FlowConfig& cfg,
                           std::span<const SecondarySpec> secondaries, std::uint64_t seed,
                           int threads = 1, EnvelopeGrid grid = {});

struct ThresholdPoint {
  double e_star = 0.0;
  double k_star = 0.0;
};

/// First crossing of E + K(E) = 0 from the high-error end, with K linear in
/// log10 E between bins.
std::optional<ThresholdPoint> threshold_point(std::span<const double> e_j,
                                              std::span<const std::optional<double>> k);
std::optional<ThresholdPoint> threshold_point(const Envelope& env, std::size_t secondary);

struct Histogram {
  std::vector<double> edges;  // size counts + 1
  std::vector<int> counts;
  std::vector<double> values;
  double bin_width = 0.0;

  int total() const;
  std::size_t mode_bin() const;
  double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
};

/// Freedman-Diaconis histogram; a zero-width sample gives one bin.
Histogram freedman_diaconis(std::vector<double> values);

/// Secondary values of every run reaching e_target, interpolated there.
/// Throws InsufficientData with fewer than min_runs such runs.
Histogram distribution_at_fidelity(const EnsembleResult& result, std::size_t secondary,
                                   double e_target, int min_runs = 10);

/// Each run sampled on the envelope grid, one point per (run, bin) reached.
std::vector<FrontPoint> ensemble_points(const EnsembleResult& result, const EnvelopeGrid& grid);
/// Every recorded trajectory sample of every run.
std::vector<FrontPoint> trajectory_points(const EnsembleResult& result);

struct Surface3D {
  std::vector<FrontPoint> surface;     // (e_j, robustness, fluence)
  std::vector<FrontPoint> robustness;  // (e_j, robustness) projection
  std::vector<FrontPoint> fluence;     // (e_j, fluence) projection
  int robustness_index = 0;
  int fluence_index = 0;
};

Surface3D surface_from_ensemble(const EnsembleResult& result, int robustness_index, int fluence_index,
                                const EnvelopeGrid& grid);

/// Hadamard-style 3D study on a one-spin system: K_eps under `kernel` and fluence.
Surface3D surface_3d(const Objective& obj, const SpinSystem& sys, int n_runs,
                     const CorrelationKernel& kernel, std::uint64_t seed, const FlowConfig& cfg = {},
                     const InitSampler& init = InitSampler::low_fluence(), int threads = 1);

}  // namespace moqc
