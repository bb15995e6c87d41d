#include "moqc/robustness.hpp"

#include <cmath>

#include "moqc/parallel.hpp"

namespace moqc {

CorrelationKernel CorrelationKernel::exp_decay(double a2, double alpha) {
  CorrelationKernel k;
  k.form = Form::ExpDecay;
  k.a2 = a2;
  k.alpha = alpha;
  k.validate();
  return k;
}

CorrelationKernel CorrelationKernel::white(double a2) {
  CorrelationKernel k;
  k.form = Form::White;
  k.a2 = a2;
  k.validate();
  return k;
}

CorrelationKernel CorrelationKernel::custom(Eigen::MatrixXd table) {
  CorrelationKernel k;
  k.form = Form::Custom;
  k.table = std::move(table);
  k.validate();
  return k;
}

void CorrelationKernel::validate() const {
  switch (form) {
    case Form::ExpDecay:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidKernel("exp_decay: alpha must be > 0");
      [[fallthrough]];
    case Form::White:
      if (!(a2 >= 0.0) || !std::isfinite(a2)) throw InvalidKernel("kernel: A^2 must be >= 0");
      break;
    case Form::Custom:
      if (table.rows() != table.cols() || table.rows() == 0) {
        throw InvalidKernel("custom kernel: table must be square and non-empty");
      }
      if (!table.allFinite()) throw InvalidKernel("custom kernel: non-finite entries");
      if ((table - table.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + table.cwiseAbs().maxCoeff())) {
        throw InvalidKernel("custom kernel: table must be symmetric");
      }
      break;
  }
}

Eigen::MatrixXd CorrelationKernel::covariance(const TimeGrid& grid) const {
  const int n = grid.n_steps;
  switch (form) {
    case Form::ExpDecay: {
      Eigen::MatrixXd r(n, n);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) r(j, k) = a2 * std::exp(-std::abs(j - k) * grid.dt / alpha);
      return r;
    }
    case Form::White:
      return Eigen::MatrixXd::Identity(n, n) * (a2 / grid.dt);
    case Form::Custom:
      if (table.rows() != n) throw GridMismatch("custom kernel: table size does not match grid");
      return table;
  }
  return {};
}

const char* to_string(CorrelationKernel::Form f) {
  switch (f) {
    case CorrelationKernel::Form::ExpDecay: return "exp_decay";
    case CorrelationKernel::Form::White: return "white";
    case CorrelationKernel::Form::Custom: return "custom";
  }
  return "?";
}

HessianKernel hessian(const Objective& obj, const SpinSystem& sys, const PropagatorHistory& hist,
                      NoiseChannel channel, int spin_index) {
  check_dimension(obj, sys);
  const Generators gens =
      interaction_generators(hist, noise_operator(sys, spin_index, channel), true);
  return HessianKernel{obj.hessian(hist.final_unitary(), gens), hist.grid, channel, spin_index};
}

HessianKernel hessian(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                      NoiseChannel channel, int spin_index) {
  return hessian(obj, sys, propagate(sys, field), channel, spin_index);
}

double k_beta(const HessianKernel& hess, const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != hess.matrix.rows() || covariance.cols() != hess.matrix.cols()) {
    throw GridMismatch("k_beta: kernel and Hessian grids differ");
  }
  // Weights dt^2 of the double Riemann sum cancel the 1/dt^2 of the continuum kernel.
  return 0.5 * hess.matrix.cwiseProduct(covariance).sum();
}

double k_beta(const HessianKernel& hess, const CorrelationKernel& kernel) {
  return k_beta(hess, kernel.covariance(hess.grid));
}

double k_beta_total(const Objective& obj, const SpinSystem& sys, const PropagatorHistory& hist,
                    const NoiseModel& model) {
  check_dimension(obj, sys);
  const CorrelationKernel& kernel = model.kernel;
  if (kernel.form == CorrelationKernel::Form::Custom) {
    const Eigen::MatrixXd r = kernel.covariance(sys.grid);
    double total = 0.0;
    for (int s = 0; s < sys.n_spins; ++s) total += k_beta(hessian(obj, sys, hist, model.channel, s), r);
    return total;
  }
  // Stationary kernels on a uniform grid are geometric in |j - k|:
  // exp decay has ratio exp(-dt / alpha); the discretized delta has ratio 0.
  const double rho =
      kernel.form == CorrelationKernel::Form::ExpDecay ? std::exp(-sys.grid.dt / kernel.alpha) : 0.0;
  const double r0 =
      kernel.form == CorrelationKernel::Form::ExpDecay ? kernel.a2 : kernel.a2 / sys.grid.dt;
  double total = 0.0;
  for (int s = 0; s < sys.n_spins; ++s) {
    const Generators gens = interaction_generators(hist, noise_operator(sys, s, model.channel), true);
    total += 0.5 * r0 * obj.geometric_contraction(hist.final_unitary(), gens, rho);
  }
  return total;
}

double k_beta_total(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                    const NoiseModel& model) {
  return k_beta_total(obj, sys, propagate(sys, field), model);
}

double fluence(const ControlField& field, int spin) {
  const TimeGrid& g = field.grid();
  if (field.parametrization() == ControlField::Parametrization::Fourier) {
    double sum = 0.0;
    for (int m = 0; m <= g.n_steps; ++m) {
      const double v = field.value_at(spin, g.time(m));
      sum += (m == 0 || m == g.n_steps) ? 0.5 * v * v : v * v;
    }
    return sum * g.dt;
  }
  double sum = 0.0;
  for (int m = 1; m <= g.n_steps; ++m) {
    const double v = field.step_value(spin, m);
    sum += v * v;
  }
  return sum * g.dt;
}

double fluence(const ControlField& field) {
  double total = 0.0;
  for (int s = 0; s < field.n_spins(); ++s) total += fluence(field, s);
  return total;
}

GaussianProcessSampler::GaussianProcessSampler(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw InvalidKernel("sampler: covariance must be square and non-empty");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (covariance + covariance.transpose()));
  if (eig.info() != Eigen::Success) throw InvalidKernel("sampler: eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double top = std::max(0.0, lambda.maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-12 * top) throw InvalidKernel("sampler: covariance is not positive semidefinite");
    lambda(i) = std::max(0.0, lambda(i));
  }
  factor_ = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd GaussianProcessSampler::sample(Rng& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return factor_ * z;
}

NoiseLossEstimate expected_noise_loss_mc(const Objective& obj, const SpinSystem& sys,
                                         const ControlField& field, const NoiseModel& model,
                                         int n_samples, std::uint64_t seed, int threads) {
  check_dimension(obj, sys);
  if (n_samples < 2) throw std::invalid_argument("expected_noise_loss_mc: need >= 2 samples");
  const ControlField samples = field.to_samples();
  const double j_clean = evaluate(obj, propagate(sys, samples));
  const GaussianProcessSampler sampler(model.kernel.covariance(sys.grid));
  std::vector<CMatrix> ops;
  for (int s = 0; s < sys.n_spins; ++s) ops.push_back(noise_operator(sys, s, model.channel));

  std::vector<double> deltas(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    std::vector<Eigen::VectorXd> draws;
    std::vector<Perturbation> extra;
    draws.reserve(ops.size());
    for (std::size_t s = 0; s < ops.size(); ++s) draws.push_back(sampler.sample(rng));
    for (std::size_t s = 0; s < ops.size(); ++s) {
      extra.push_back({ops[s], std::span<const double>(draws[s].data(), draws[s].size())});
    }
    deltas[i] = evaluate(obj, propagate(sys, samples, extra)) - j_clean;
  });

  double mean = 0.0;
  for (double d : deltas) mean += d;
  mean /= n_samples;
  double var = 0.0;
  for (double d : deltas) var += (d - mean) * (d - mean);
  var /= (n_samples - 1);
  return {mean, std::sqrt(var / n_samples), n_samples};
}

}  // namespace moqc
