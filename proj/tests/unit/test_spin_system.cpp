#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "moqc/spin_system.hpp"

using namespace moqc;

TEST(SpinSystem, Presets) {
  const SpinSystem a = SpinSystem::two_level();
  EXPECT_EQ(a.dim(), 2);
  EXPECT_DOUBLE_EQ(a.grid.dt, 0.01);
  EXPECT_EQ(a.grid.n_steps, 100);
  EXPECT_EQ(a.max_fourier_mode(), 10);
  const SpinSystem b = SpinSystem::four_level();
  EXPECT_EQ(b.dim(), 4);
  EXPECT_DOUBLE_EQ(b.grid.total_time, 6.0);
  EXPECT_DOUBLE_EQ(b.grid.dt, 0.06);
  EXPECT_DOUBLE_EQ(b.coupling, 0.2);
  EXPECT_EQ(b.max_fourier_mode(), 20);
  EXPECT_NO_THROW(a.validate());
  EXPECT_NO_THROW(b.validate());
}

TEST(SpinSystem, ValidateRejects) {
  SpinSystem s = SpinSystem::two_level();
  s.n_spins = 3;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = SpinSystem::two_level();
  s.omegas = {20.0, 24.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = SpinSystem::two_level();
  s.grid.dt = 0.02;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(TimeGrid::make(1.0, 0), std::invalid_argument);
}

TEST(SpinSystem, DriftIsDiagonalAndTraceless) {
  const CMatrix h = build_drift(SpinSystem::four_level());
  EXPECT_NEAR(std::abs(h.trace()), 0.0, 1e-15);
  EXPECT_LT((h - h.adjoint()).norm(), 1e-15);
  const CMatrix h1 = build_drift(SpinSystem::two_level());
  EXPECT_DOUBLE_EQ(h1(0, 0).real(), 10.0);
  EXPECT_DOUBLE_EQ(h1(1, 1).real(), -10.0);
}

TEST(SpinSystem, Operators) {
  const SpinSystem s = SpinSystem::four_level();
  const CMatrix x1 = control_operator(s, 0);
  EXPECT_LT((x1 - kron(pauli::x(), pauli::identity())).norm(), 1e-15);
  const CMatrix x2 = control_operator(s, 1);
  EXPECT_LT((x2 - kron(pauli::identity(), pauli::x())).norm(), 1e-15);
  const CMatrix z2 = noise_operator(s, 1, NoiseChannel::Detuning);
  EXPECT_LT((z2 - 0.5 * kron(pauli::identity(), pauli::z())).norm(), 1e-15);
  EXPECT_THROW(control_operator(s, 2), std::out_of_range);
}

TEST(ControlField, FourierValuesAndSampling) {
  const TimeGrid g = TimeGrid::two_level();
  const ControlField f = ControlField::from_fourier(g, {{{1, 0.5, 0.3}, {3, 0.1, 1.0}}});
  const double t = 0.37;
  EXPECT_NEAR(f.value_at(0, t),
              0.5 * std::sin(std::numbers::pi * t + 0.3) + 0.1 * std::sin(3 * std::numbers::pi * t + 1.0), 1e-15);
  const ControlField s = f.to_samples();
  EXPECT_EQ(s.parametrization(), ControlField::Parametrization::TimeSamples);
  // Step m holds the right-endpoint value.
  for (int m : {1, 50, 100}) {
    EXPECT_DOUBLE_EQ(s.step_value(0, m), f.value_at(0, g.time(m)));
    EXPECT_DOUBLE_EQ(f.step_value(0, m), f.value_at(0, g.time(m)));
  }
  EXPECT_EQ(s.flat_samples().size(), 100u);
}

TEST(ControlField, FlatLayoutIsSpinMajor) {
  const TimeGrid g = TimeGrid::make(1.0, 4);
  const std::vector<double> flat{1, 2, 3, 4, 5, 6, 7, 8};
  const ControlField f = ControlField::from_flat(g, 2, flat);
  EXPECT_DOUBLE_EQ(f.step_value(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(f.step_value(1, 1), 5.0);
  EXPECT_DOUBLE_EQ(f.step_value(1, 4), 8.0);
  EXPECT_THROW(ControlField::from_flat(g, 2, std::vector<double>(7)), GridMismatch);
  EXPECT_THROW(ControlField::from_samples(g, {{1, 2, 3}}), GridMismatch);
}

TEST(ControlField, RandomFieldRangesAndDeterminism) {
  const SpinSystem s = SpinSystem::four_level();
  const ControlField a = sample_random_field(AmplitudeRange::low_fluence(), s, 20, 42);
  const ControlField b = sample_random_field(AmplitudeRange::low_fluence(), s, 20, 42);
  const ControlField c = sample_random_field(AmplitudeRange::low_fluence(), s, 20, 43);
  ASSERT_EQ(a.modes().size(), 2u);
  for (int spin = 0; spin < 2; ++spin) {
    ASSERT_EQ(a.modes()[spin].size(), 20u);
    for (std::size_t k = 0; k < 20; ++k) {
      const FourierMode& m = a.modes()[spin][k];
      EXPECT_EQ(m.k, int(k) + 1);
      EXPECT_GE(m.amplitude, 0.0);
      EXPECT_LE(m.amplitude, 0.05);
      EXPECT_GE(m.phase, 0.0);
      EXPECT_LT(m.phase, 2 * std::numbers::pi);
      EXPECT_EQ(m.amplitude, b.modes()[spin][k].amplitude);
      EXPECT_EQ(m.phase, b.modes()[spin][k].phase);
    }
  }
  EXPECT_NE(a.modes()[0][0].amplitude, c.modes()[0][0].amplitude);
}

TEST(ControlField, FrequencyCap) {
  const SpinSystem s = SpinSystem::two_level();
  EXPECT_THROW(sample_random_field(AmplitudeRange::low_fluence(), s, 11, 1), std::invalid_argument);
  EXPECT_THROW(sample_random_field(AmplitudeRange{1.0, 0.5}, s, 5, 1), std::invalid_argument);
}
