#include "moqc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "moqc/dmorph.hpp"
#include "moqc/table_io.hpp"

namespace moqc {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

void VerifyReport::print(std::ostream& os) const {
  os << std::left << std::setw(14) << "suite" << std::setw(34) << "check" << std::setw(24) << "measured"
     << std::setw(24) << "tolerance" << "result\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(14) << c.suite << std::setw(34) << c.name << std::setw(24)
       << format_number(c.measured) << std::setw(24) << format_number(c.tolerance) << (c.passed ? "pass" : "FAIL")
       << "\n";
  }
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"gradients", "hessians", "unitarity", "kbeta-oracle"};
  return s;
}

namespace {

struct Case {
  SpinSystem sys;
  Objective obj;
};

std::vector<Case> cases(int n_steps) {
  SpinSystem two = SpinSystem::two_level();
  SpinSystem four = SpinSystem::four_level();
  if (n_steps > 0) {
    two.grid = TimeGrid::make(two.grid.total_time, n_steps);
    four.grid = TimeGrid::make(four.grid.total_time, n_steps);
  }
  return {{two, Objective::state_transfer(two, 1, 2)}, {two, Objective::sigma_x(two)}, {two, Objective::hadamard()},
          {four, Objective::state_transfer(four, 1, 4)}, {four, Objective::sigma_x(four)}, {four, Objective::cnot()}};
}

// max |a - b| / max(|b|, atol / rtol): <= rtol exactly when every entry meets
// |a - b| <= max(rtol |b|, atol).
double scaled_error(double a, double b, double rtol, double atol) {
  return std::abs(a - b) / std::max(std::abs(b), atol / rtol);
}

double j_of(const Case& c, const std::vector<double>& flat) {
  return evaluate(c.obj, propagate(c.sys, ControlField::from_flat(c.sys.grid, c.sys.n_spins, flat)));
}

void gradients(VerifyReport& rep, std::uint64_t seed) {
  constexpr double rtol = 1e-5, atol = 1e-9, h = 1e-6;
  int ci = 0;
  for (const Case& c : cases(0)) {
    const int n_fields = c.sys.n_spins == 1 ? 20 : 4;
    double worst = 0.0;
    for (int f = 0; f < n_fields; ++f) {
      const ControlField field = sample_random_field({0.0, 5.0}, c.sys, c.sys.max_fourier_mode(),
                                                     derive_seed(seed, 100 * ci + f)).to_samples();
      const std::vector<double> g = gradient(c.obj, c.sys, field);
      std::vector<double> x = field.flat_samples();
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double jp = j_of(c, x);
        x[i] = x0 - h;
        const double jm = j_of(c, x);
        x[i] = x0;
        worst = std::max(worst, scaled_error(g[i], (jp - jm) / (2.0 * h), rtol, atol));
      }
    }
    rep.checks.push_back({"gradients", c.obj.name() + " (" + std::to_string(c.sys.dim()) + "-level)", worst * rtol,
                          rtol, worst <= 1.0});
    ++ci;
  }
}

void hessians(VerifyReport& rep, std::uint64_t seed) {
  constexpr double rtol = 1e-4, atol = 1e-8, h = 1e-3;
  int ci = 0;
  for (const Case& c : cases(20)) {
    const ControlField field =
        sample_random_field({0.0, 5.0}, c.sys, c.sys.max_fourier_mode(), derive_seed(seed, 7 + ci)).to_samples();
    const int n = c.sys.grid.n_steps;
    for (NoiseChannel ch : {NoiseChannel::Field, NoiseChannel::Detuning}) {
      double worst = 0.0;
      for (int spin = 0; spin < c.sys.n_spins; ++spin) {
        const HessianKernel hk = hessian(c.obj, c.sys, field, ch, spin);
        const CMatrix op = noise_operator(c.sys, spin, ch);
        std::vector<double> beta(n, 0.0);
        auto j_at = [&] {
          const Perturbation p{op, beta};
          return evaluate(c.obj, propagate(c.sys, field, std::span<const Perturbation>(&p, 1)));
        };
        const double j0 = j_at();
        for (int a = 0; a < n; ++a) {
          for (int b = a; b < n; ++b) {
            double fd;
            if (a == b) {
              beta[a] = h;
              const double jp = j_at();
              beta[a] = -h;
              const double jm = j_at();
              beta[a] = 0.0;
              fd = (jp - 2.0 * j0 + jm) / (h * h);
            } else {
              double acc = 0.0;
              for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                  beta[a] = sa * h;
                  beta[b] = sb * h;
                  acc += sa * sb * j_at();
                }
              beta[a] = beta[b] = 0.0;
              fd = acc / (4.0 * h * h);
            }
            worst = std::max(worst, scaled_error(hk.matrix(a, b), fd, rtol, atol));
            worst = std::max(worst, scaled_error(hk.matrix(b, a), fd, rtol, atol));
          }
        }
      }
      rep.checks.push_back({"hessians", c.obj.name() + " " + to_string(ch) + " (n=20)", worst * rtol, rtol,
                            worst <= 1.0});
    }
    ++ci;
  }
}

void unitarity(VerifyReport& rep, std::uint64_t seed) {
  constexpr double tol = 1e-10;
  for (const SpinSystem& sys : {SpinSystem::two_level(), SpinSystem::four_level()}) {
    double worst = 0.0;
    for (int f = 0; f < 100; ++f) {
      const ControlField field =
          sample_random_field(AmplitudeRange::high_fluence(), sys, sys.max_fourier_mode(), derive_seed(seed, f));
      const PropagatorHistory hist = propagate(sys, field);
      for (const auto& u : hist.cumulative) worst = std::max(worst, unitarity_error(u));
    }
    rep.checks.push_back({"unitarity", "max |U^+U - I| " + std::to_string(sys.dim()) + "-level (100 fields)", worst,
                          tol, worst <= tol});
  }
}

void kbeta_oracle(VerifyReport& rep, std::uint64_t seed, int threads) {
  const SpinSystem sys = SpinSystem::two_level();
  const Objective obj = Objective::state_transfer(sys, 1, 2);
  const ControlField init = sample_random_field(AmplitudeRange::low_fluence(), sys, sys.max_fourier_mode(), seed);
  const TrajectoryRecord rec = flow(obj, sys, init, FlowConfig{}, {});
  rep.checks.push_back({"kbeta-oracle", "flow converged (E_J)", rec.samples.back().e_j, 1e-8, rec.converged});
  const CorrelationKernel kernel = CorrelationKernel::exp_decay(1e-4, 1.0);
  for (NoiseChannel ch : {NoiseChannel::Field, NoiseChannel::Detuning}) {
    const NoiseModel model{ch, kernel};
    const double k = k_beta_total(obj, sys, rec.final_field, model);
    const NoiseLossEstimate mc = expected_noise_loss_mc(obj, sys, rec.final_field, model, 2000,
                                                        derive_seed(seed, 99), threads);
    const double z = std::abs(k - mc.mean) / mc.std_error;
    rep.checks.push_back({"kbeta-oracle", std::string("|K - MC| / SE ") + to_string(ch), z, 3.0, z <= 3.0});
    rep.checks.push_back({"kbeta-oracle", std::string("K < 0 ") + to_string(ch), k, 0.0, k < 0.0});
  }
}

}  // namespace

VerifyReport run_verify(const std::string& suite, std::uint64_t seed, int threads) {
  VerifyReport rep;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "gradients") {
    gradients(rep, seed);
    known = true;
  }
  if (all || suite == "hessians") {
    hessians(rep, seed);
    known = true;
  }
  if (all || suite == "unitarity") {
    unitarity(rep, seed);
    known = true;
  }
  if (all || suite == "kbeta-oracle") {
    kbeta_oracle(rep, seed, threads);
    known = true;
  }
  if (!known) throw std::invalid_argument("unknown verify suite '" + suite + "'");
  return rep;
}

}  // namespace moqc
