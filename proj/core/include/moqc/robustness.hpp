#pragma once

// Secondary objectives: Hessian-kernel noise robustness and fluence.
//
// Noise delta_beta(t) enters additively through the Hamiltonian,
// H(t) + delta_beta(t) B, with B = noise_operator(channel). The robustness
//
//   K_beta = 1/2 sum_j sum_k (d^2 J / d beta_j d beta_k) R(t_j, t_k)
//
// is the second-order expected change in J. Hessians are stored as
// per-sample partials; the continuum kernel is matrix / dt^2.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moqc/dynamics.hpp"
#include "moqc/rng.hpp"

namespace moqc {

class InvalidKernel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CorrelationKernel {
  enum class Form { ExpDecay, White, Custom };

  Form form = Form::ExpDecay;
  double a2 = 1e-4;
  double alpha = 1.0;
  Eigen::MatrixXd table;  // Custom: R(t_j, t_k) on the step grid

  static CorrelationKernel exp_decay(double a2, double alpha);
  /// Discretized delta correlation: R_jj = a2 / dt.
  static CorrelationKernel white(double a2);
  static CorrelationKernel custom(Eigen::MatrixXd table);

  /// R(t_j, t_k) for j, k = 1..n_steps.
  Eigen::MatrixXd covariance(const TimeGrid& grid) const;
  void validate() const;
};

const char* to_string(CorrelationKernel::Form f);

struct NoiseModel {
  NoiseChannel channel = NoiseChannel::Field;
  CorrelationKernel kernel;
};

struct HessianKernel {
  Eigen::MatrixXd matrix;  // d^2 J / d beta_j d beta_k
  TimeGrid grid;
  NoiseChannel channel = NoiseChannel::Field;
  int spin_index = 0;

  /// Continuum kernel H(t_j, t_k) = matrix / dt^2.
  Eigen::MatrixXd continuum() const { return matrix / (grid.dt * grid.dt); }
};

HessianKernel hessian(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                      NoiseChannel channel, int spin_index);
HessianKernel hessian(const Objective& obj, const SpinSystem& sys, const PropagatorHistory& hist,
                      NoiseChannel channel, int spin_index);

double k_beta(const HessianKernel& hess, const CorrelationKernel& kernel);
/// Same contraction against a precomputed covariance table.
double k_beta(const HessianKernel& hess, const Eigen::MatrixXd& covariance);

/// Sum over spins of K_beta for independent, identically distributed noise per spin.
double k_beta_total(const Objective& obj, const SpinSystem& sys, const PropagatorHistory& hist,
                    const NoiseModel& model);
double k_beta_total(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                    const NoiseModel& model);

/// Total fluence sum_i int_0^T eps_i^2 dt. Fourier fields use the trapezoid rule
/// on t_0..t_n; sampled fields integrate the held step values exactly.
double fluence(const ControlField& field);
double fluence(const ControlField& field, int spin);

/// Draws zero-mean Gaussian vectors with a given covariance through its
/// eigendecomposition; eigenvalues in [-1e-12 max, 0) are clipped to zero.
class GaussianProcessSampler {
 public:
  explicit GaussianProcessSampler(const Eigen::MatrixXd& covariance);
  Eigen::VectorXd sample(Rng& rng) const;
  Eigen::Index size() const { return factor_.rows(); }

 private:
  Eigen::MatrixXd factor_;  // V sqrt(Lambda)
};

struct NoiseLossEstimate {
  double mean = 0.0;  // mean(J_noisy) - J_clean
  double std_error = 0.0;
  int n_samples = 0;
};

/// Monte-Carlo estimate of the expected change in J under the noise model.
/// Each sample draws an independent realization for every spin; results are
/// deterministic in `seed` independent of threads.
NoiseLossEstimate expected_noise_loss_mc(const Objective& obj, const SpinSystem& sys,
                                         const ControlField& field, const NoiseModel& model,
                                         int n_samples, std::uint64_t seed, int threads = 1);

}  // namespace moqc
