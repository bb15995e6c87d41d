#pragma once

// Model of M <= 2 coupled spins driven by one control field per spin:
//
//   H(t) = sum_i (omega_i / 2) sigma_z^(i) + sum_i eps_i(t) sigma_x^(i)
//          + J_12 (sigma_x sigma_x + sigma_y sigma_y + sigma_z sigma_z)
//
// Controls are piecewise constant on a uniform grid; the value used for
// step m (interval (t_{m-1}, t_m]) is the sample at the right endpoint t_m.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "moqc/linalg.hpp"

namespace moqc {

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TimeGrid {
  double total_time = 1.0;
  double dt = 0.01;
  int n_steps = 100;

  /// dt = total_time / n_steps.
  static TimeGrid make(double total_time, int n_steps);
  /// T = 1, dt = 0.01.
  static TimeGrid two_level();
  /// T = 6, dt = 0.06.
  static TimeGrid four_level();

  double time(int m) const { return m * dt; }
  bool operator==(const TimeGrid&) const = default;
};

struct SpinSystem {
  int n_spins = 1;
  std::vector<double> omegas{20.0};
  double coupling = 0.0;
  TimeGrid grid = TimeGrid::two_level();

  /// omega = 20, T = 1, dt = 0.01.
  static SpinSystem two_level();
  /// omega = (20, 24), J_12 = 0.2, T = 6, dt = 0.06.
  static SpinSystem four_level();

  int dim() const { return 1 << n_spins; }
  /// Highest Fourier mode index allowed by the frequency cap (k pi <= 10 pi or 20 pi).
  int max_fourier_mode() const { return n_spins == 1 ? 10 : 20; }
  void validate() const;
};

enum class NoiseChannel { Field, Detuning };

const char* to_string(NoiseChannel c);

CMatrix build_drift(const SpinSystem& sys);
/// sigma_x on the given spin.
CMatrix control_operator(const SpinSystem& sys, int spin_index);
/// dH/d eps_i = sigma_x^(i) or dH/d omega_i = sigma_z^(i) / 2.
CMatrix noise_operator(const SpinSystem& sys, int spin_index, NoiseChannel channel);

struct FourierMode {
  int k = 1;  // angular frequency k * pi
  double amplitude = 0.0;
  double phase = 0.0;
};

class ControlField {
 public:
  enum class Parametrization { TimeSamples, Fourier };

  /// samples[spin][m-1] is the field at t_m, m = 1..n_steps.
  static ControlField from_samples(const TimeGrid& grid, std::vector<std::vector<double>> samples);
  static ControlField from_flat(const TimeGrid& grid, int n_spins, std::span<const double> flat);
  static ControlField from_fourier(const TimeGrid& grid, std::vector<std::vector<FourierMode>> modes);
  static ControlField zero(const TimeGrid& grid, int n_spins);

  Parametrization parametrization() const { return param_; }
  const TimeGrid& grid() const { return grid_; }
  int n_spins() const { return n_spins_; }

  /// eps_spin(t) for arbitrary t (Fourier) or the held step value (samples).
  double value_at(int spin, double t) const;
  /// Field applied during step m, 1 <= m <= n_steps.
  double step_value(int spin, int m) const;

  /// Converted copy; a TimeSamples field is returned unchanged.
  ControlField to_samples() const;
  /// Spin-major flat sample vector, index spin * n_steps + (m - 1).
  const std::vector<double>& flat_samples() const;
  const std::vector<std::vector<FourierMode>>& modes() const;

 private:
  Parametrization param_ = Parametrization::TimeSamples;
  TimeGrid grid_;
  int n_spins_ = 1;
  std::vector<double> samples_;
  std::vector<std::vector<FourierMode>> modes_;
};

struct AmplitudeRange {
  double lo = 0.0;
  double hi = 0.05;

  static AmplitudeRange low_fluence() { return {0.0, 0.05}; }
  static AmplitudeRange high_fluence() { return {0.0, 50.0}; }
};

/// Fourier field with modes k = 1..n_modes per spin, amplitudes uniform in
/// `range`, phases uniform in [0, 2 pi). Deterministic in `seed`.
ControlField sample_random_field(const AmplitudeRange& range, const SpinSystem& sys, int n_modes,
                                 std::uint64_t seed);

}  // namespace moqc
