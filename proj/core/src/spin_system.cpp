#include "moqc/spin_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "moqc/rng.hpp"

namespace moqc {

TimeGrid TimeGrid::make(double total_time, int n_steps) {
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw std::invalid_argument("TimeGrid: total_time must be positive and finite");
  }
  if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  return TimeGrid{total_time, total_time / n_steps, n_steps};
}

TimeGrid TimeGrid::two_level() { return make(1.0, 100); }
TimeGrid TimeGrid::four_level() { return make(6.0, 100); }

SpinSystem SpinSystem::two_level() { return SpinSystem{1, {20.0}, 0.0, TimeGrid::two_level()}; }

SpinSystem SpinSystem::four_level() {
  return SpinSystem{2, {20.0, 24.0}, 0.2, TimeGrid::four_level()};
}

void SpinSystem::validate() const {
  if (n_spins != 1 && n_spins != 2) throw std::invalid_argument("SpinSystem: n_spins must be 1 or 2");
  if (static_cast<int>(omegas.size()) != n_spins) {
    throw std::invalid_argument("SpinSystem: need one omega per spin");
  }
  for (double w : omegas)
    if (!std::isfinite(w)) throw std::invalid_argument("SpinSystem: omega must be finite");
  if (!std::isfinite(coupling)) throw std::invalid_argument("SpinSystem: coupling must be finite");
  if (n_spins == 1 && coupling != 0.0) {
    throw std::invalid_argument("SpinSystem: coupling requires two spins");
  }
  if (grid.n_steps < 1 || !(grid.dt > 0.0) ||
      std::abs(grid.dt * grid.n_steps - grid.total_time) > 1e-12 * grid.total_time) {
    throw std::invalid_argument("SpinSystem: grid needs dt * n_steps = total_time");
  }
}

const char* to_string(NoiseChannel c) { return c == NoiseChannel::Field ? "field" : "detuning"; }

namespace {

CMatrix on_spin(const SpinSystem& sys, int spin_index, const CMatrix& op) {
  if (spin_index < 0 || spin_index >= sys.n_spins) {
    throw std::out_of_range("spin index " + std::to_string(spin_index) + " out of range");
  }
  if (sys.n_spins == 1) return op;
  return spin_index == 0 ? kron(op, pauli::identity()) : kron(pauli::identity(), op);
}

}  // namespace

CMatrix build_drift(const SpinSystem& sys) {
  sys.validate();
  const int d = sys.dim();
  CMatrix h = CMatrix::Zero(d, d);
  for (int i = 0; i < sys.n_spins; ++i) h += (0.5 * sys.omegas[i]) * on_spin(sys, i, pauli::z());
  if (sys.n_spins == 2 && sys.coupling != 0.0) {
    h += sys.coupling * (kron(pauli::x(), pauli::x()) + kron(pauli::y(), pauli::y()) +
                         kron(pauli::z(), pauli::z()));
  }
  return h;
}

CMatrix control_operator(const SpinSystem& sys, int spin_index) {
  return on_spin(sys, spin_index, pauli::x());
}

CMatrix noise_operator(const SpinSystem& sys, int spin_index, NoiseChannel channel) {
  if (channel == NoiseChannel::Field) return control_operator(sys, spin_index);
  return on_spin(sys, spin_index, 0.5 * pauli::z());
}

ControlField ControlField::from_samples(const TimeGrid& grid,
                                        std::vector<std::vector<double>> samples) {
  if (samples.empty() || samples.size() > 2) {
    throw std::invalid_argument("ControlField: need samples for 1 or 2 spins");
  }
  ControlField f;
  f.param_ = Parametrization::TimeSamples;
  f.grid_ = grid;
  f.n_spins_ = static_cast<int>(samples.size());
  f.samples_.reserve(samples.size() * grid.n_steps);
  for (const auto& s : samples) {
    if (static_cast<int>(s.size()) != grid.n_steps) {
      throw GridMismatch("ControlField: sample count " + std::to_string(s.size()) +
                         " does not match grid n_steps " + std::to_string(grid.n_steps));
    }
    f.samples_.insert(f.samples_.end(), s.begin(), s.end());
  }
  return f;
}

ControlField ControlField::from_flat(const TimeGrid& grid, int n_spins,
                                     std::span<const double> flat) {
  if (n_spins < 1 || n_spins > 2) throw std::invalid_argument("ControlField: n_spins must be 1 or 2");
  if (flat.size() != static_cast<std::size_t>(n_spins) * grid.n_steps) {
    throw GridMismatch("ControlField: flat sample vector has wrong length");
  }
  ControlField f;
  f.param_ = Parametrization::TimeSamples;
  f.grid_ = grid;
  f.n_spins_ = n_spins;
  f.samples_.assign(flat.begin(), flat.end());
  return f;
}

ControlField ControlField::from_fourier(const TimeGrid& grid,
                                        std::vector<std::vector<FourierMode>> modes) {
  if (modes.empty() || modes.size() > 2) {
    throw std::invalid_argument("ControlField: need modes for 1 or 2 spins");
  }
  for (const auto& spin_modes : modes)
    for (const auto& m : spin_modes)
      if (m.k < 1) throw std::invalid_argument("ControlField: Fourier index must be >= 1");
  ControlField f;
  f.param_ = Parametrization::Fourier;
  f.grid_ = grid;
  f.n_spins_ = static_cast<int>(modes.size());
  f.modes_ = std::move(modes);
  return f;
}

ControlField ControlField::zero(const TimeGrid& grid, int n_spins) {
  return from_samples(grid, std::vector<std::vector<double>>(n_spins,
                                                             std::vector<double>(grid.n_steps)));
}

double ControlField::value_at(int spin, double t) const {
  if (param_ == Parametrization::Fourier) {
    double v = 0.0;
    for (const auto& m : modes_.at(spin))
      v += m.amplitude * std::sin(m.k * std::numbers::pi * t + m.phase);
    return v;
  }
  int m = static_cast<int>(std::ceil(t / grid_.dt - 1e-9));
  m = std::clamp(m, 1, grid_.n_steps);
  return step_value(spin, m);
}

double ControlField::step_value(int spin, int m) const {
  if (param_ == Parametrization::Fourier) return value_at(spin, grid_.time(m));
  return samples_[static_cast<std::size_t>(spin) * grid_.n_steps + (m - 1)];
}

ControlField ControlField::to_samples() const {
  if (param_ == Parametrization::TimeSamples) return *this;
  ControlField f;
  f.param_ = Parametrization::TimeSamples;
  f.grid_ = grid_;
  f.n_spins_ = n_spins_;
  f.samples_.resize(static_cast<std::size_t>(n_spins_) * grid_.n_steps);
  for (int s = 0; s < n_spins_; ++s)
    for (int m = 1; m <= grid_.n_steps; ++m)
      f.samples_[static_cast<std::size_t>(s) * grid_.n_steps + (m - 1)] = value_at(s, grid_.time(m));
  return f;
}

const std::vector<double>& ControlField::flat_samples() const {
  if (param_ != Parametrization::TimeSamples) {
    throw std::logic_error("ControlField: flat_samples requires TimeSamples form");
  }
  return samples_;
}

const std::vector<std::vector<FourierMode>>& ControlField::modes() const {
  if (param_ != Parametrization::Fourier) {
    throw std::logic_error("ControlField: modes requires Fourier form");
  }
  return modes_;
}

ControlField sample_random_field(const AmplitudeRange& range, const SpinSystem& sys, int n_modes,
                                 std::uint64_t seed) {
  if (!(range.hi >= range.lo) || range.lo < 0.0 || !std::isfinite(range.hi)) {
    throw std::invalid_argument("sample_random_field: empty or invalid amplitude interval");
  }
  if (n_modes < 1 || n_modes > sys.max_fourier_mode()) {
    throw std::invalid_argument("sample_random_field: mode count exceeds frequency cap");
  }
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> amp(range.lo, range.hi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::vector<FourierMode>> modes(sys.n_spins);
  for (auto& spin_modes : modes) {
    for (int k = 1; k <= n_modes; ++k) {
      FourierMode m;
      m.k = k;
      m.amplitude = range.hi == range.lo ? range.lo : amp(rng);
      m.phase = phase(rng);
      spin_modes.push_back(m);
    }
  }
  return ControlField::from_fourier(sys.grid, std::move(modes));
}

}  // namespace moqc
