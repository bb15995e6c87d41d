#pragma once

// Steady-state multi-objective evolution strategy over Fourier control
// parameters. Each individual carries its own (1+1)-ES step size driven by a
// smoothed success rate, optionally with a full covariance. Environmental
// selection keeps mu of mu+1 by nondominated rank, then by exclusive 2D
// hypervolume contribution. Objectives are (E_J, -K_beta), both minimized.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "moqc/fronts.hpp"

namespace moqc {

class OutsideReference : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point2 = std::pair<double, double>;

/// Area dominated by `front` (minimization) and bounded by `reference`.
double hypervolume_2d(std::span<const Point2> front, Point2 reference);

/// Exclusive contribution of every point, by position, measured against the
/// nondominated subset. Points that are dominated or duplicated contribute zero.
std::vector<double> hypervolume_contributions(std::span<const Point2> points, Point2 reference);

/// Nondominated rank (0 = best) of each point.
std::vector<int> nondominated_ranks(std::span<const Point2> points);

struct Individual {
  Eigen::VectorXd genome;  // per spin, per mode k = 1..K: (a_k, phi_k)
  double step_size = 0.0;
  double success_rate = 0.0;
  Point2 fitness{1.0, 0.0};  // (E_J, -K_beta)
  // Full-covariance state in scaled coordinates, unused in isotropic mode.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd evolution_path;
  long id = 0;
};

struct MoeaConfig {
  int population = 100;
  int generations = 1000;
  InitSampler init = InitSampler::low_fluence();
  double initial_step = 0.1;  // relative to the per-coordinate scale
  bool full_covariance = false;
  int history_stride = 1;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  /// 1000 generations for one spin, 2000 for two.
  static int default_generations(const SpinSystem& sys) { return sys.n_spins == 1 ? 1000 : 2000; }
};

struct MoeaGeneration {
  int generation = 0;
  Point2 reference{1.0, 0.0};
  double hypervolume = 0.0;
  std::vector<Point2> front;
};

struct MoeaResult {
  std::vector<Individual> population;
  std::vector<FrontPoint> front;  // secondaries = {K_beta}
  std::vector<MoeaGeneration> history;
  long evaluations = 0;
  int n_modes = 0;
};

/// Fourier field for a genome laid out as in Individual.
ControlField genome_field(const SpinSystem& sys, std::span<const double> genome, int n_modes);
Eigen::VectorXd field_genome(const ControlField& field);

/// (E_J, -K_beta) through the same propagation and K_beta path used for
/// trajectory secondaries.
Point2 moea_fitness(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const ControlField& field);

/// Reference point (1, max f2 + 0.1 |max f2| + eps).
Point2 moea_reference(double max_f2);

MoeaResult moea_run(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const MoeaConfig& cfg);

/// Run from a given starting population (fitness is recomputed).
MoeaResult moea_run(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const MoeaConfig& cfg, std::vector<Individual> start);

}  // namespace moqc
