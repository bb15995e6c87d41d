#include <gtest/gtest.h>

#include <cmath>

#include "moqc/dmorph.hpp"

using namespace moqc;

namespace {

const SpinSystem kTwo = SpinSystem::two_level();

ControlField start(std::uint64_t seed) {
  return sample_random_field(AmplitudeRange::low_fluence(), kTwo, 10, seed);
}

}  // namespace

TEST(Flow, ConvergesMonotonically) {
  const Objective obj = Objective::state_transfer(kTwo, 1, 2);
  const auto secs = standard_secondaries(CorrelationKernel::exp_decay(1e-4, 1.0));
  const TrajectoryRecord r = flow(obj, kTwo, start(1), {}, secs);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.status, FlowStatus::Converged);
  EXPECT_LE(r.samples.back().e_j, 1e-8);
  EXPECT_LT(r.max_uphill, 1e-10);
  for (std::size_t i = 1; i < r.samples.size(); ++i) {
    EXPECT_LE(r.samples[i].e_j, r.samples[i - 1].e_j + 1e-10);
    EXPECT_GT(r.samples[i].s, r.samples[i - 1].s);
    EXPECT_EQ(r.samples[i].secondaries.size(), 3u);
  }
  EXPECT_NEAR(r.samples.back().e_j, fidelity_error(evaluate(obj, propagate(kTwo, r.final_field))), 1e-15);
  EXPECT_EQ(r.secondary_names, (std::vector<std::string>{"K_eps", "K_omega", "fluence"}));
}

TEST(Flow, RecordedSecondariesMatchDirectEvaluation) {
  const Objective obj = Objective::sigma_x(kTwo);
  const auto secs = standard_secondaries(CorrelationKernel::exp_decay(1e-4, 2.0));
  FlowConfig cfg;
  cfg.max_steps = 1;
  const TrajectoryRecord r = flow(obj, kTwo, start(2), cfg, secs);
  const ControlField f0 = start(2).to_samples();
  const PropagatorHistory h = propagate(kTwo, f0);
  for (std::size_t i = 0; i < secs.size(); ++i)
    EXPECT_EQ(r.samples.front().secondaries[i], evaluate_secondary(secs[i], obj, kTwo, f0, h));
}

TEST(Flow, SnapshotsAtDecades) {
  const TrajectoryRecord r = flow(Objective::hadamard(), kTwo, start(3), {}, {});
  ASSERT_TRUE(r.converged);
  ASSERT_FALSE(r.snapshots.empty());
  double m = 1e-1;
  for (const FieldSnapshot& snap : r.snapshots) {
    EXPECT_DOUBLE_EQ(snap.milestone, m);
    EXPECT_LE(snap.e_j, snap.milestone);
    m *= 0.1;
  }
  EXPECT_LE(r.snapshots.back().milestone, 1e-8 * 1.0000001);
}

TEST(Flow, StallsAtCriticalPoint) {
  // Zero field: U is diagonal and the transfer gradient vanishes exactly.
  const TrajectoryRecord r =
      flow(Objective::state_transfer(kTwo, 1, 2), kTwo, ControlField::zero(kTwo.grid, 1), {}, {});
  EXPECT_EQ(r.status, FlowStatus::Stalled);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.accepted_steps, 0);
}

TEST(Flow, StopsAtSMaxAndStepLimit) {
  const Objective obj = Objective::state_transfer(kTwo, 1, 2);
  FlowConfig cfg;
  cfg.s_max = 1e-3;
  TrajectoryRecord r = flow(obj, kTwo, start(4), cfg, {});
  EXPECT_EQ(r.status, FlowStatus::SMaxReached);
  EXPECT_NEAR(r.samples.back().s, 1e-3, 1e-15);
  cfg = {};
  cfg.max_steps = 3;
  r = flow(obj, kTwo, start(4), cfg, {});
  EXPECT_EQ(r.status, FlowStatus::StepLimit);
  EXPECT_EQ(r.accepted_steps, 3);
}

TEST(Flow, RecordStrideKeepsLastSample) {
  const Objective obj = Objective::state_transfer(kTwo, 1, 2);
  FlowConfig cfg;
  cfg.record_stride = 7;
  const TrajectoryRecord full = flow(obj, kTwo, start(5), {}, {});
  const TrajectoryRecord sparse = flow(obj, kTwo, start(5), cfg, {});
  EXPECT_LT(sparse.samples.size(), full.samples.size());
  EXPECT_EQ(sparse.samples.back().e_j, full.samples.back().e_j);
}

TEST(Flow, ConfigValidation) {
  FlowConfig c;
  c.target_error = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.s_max = INFINITY;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.record_stride = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.rel_tol = -1;
  EXPECT_THROW(flow(Objective::sigma_x(kTwo), kTwo, start(1), c, {}), std::invalid_argument);
  EXPECT_THROW(flow(Objective::sigma_x(kTwo), kTwo, ControlField::zero(TimeGrid::make(1, 10), 1), {}, {}),
               GridMismatch);
  EXPECT_THROW(flow(Objective::cnot(), kTwo, start(1), {}, {}), DimensionMismatch);
}

TEST(Flow, GradientNormVanishesAtTop) {
  const TrajectoryRecord r = flow(Objective::state_transfer(kTwo, 1, 2), kTwo, start(6), {}, {});
  const auto prof = gradient_norm_profile(r);
  ASSERT_EQ(prof.size(), r.samples.size());
  double peak = 0.0;
  for (const auto& p : prof) peak = std::max(peak, p.second);
  EXPECT_LT(prof.back().second, 1e-3 * peak);
}

TEST(Flow, InvariancePlateau) {
  const Objective obj = Objective::state_transfer(kTwo, 1, 2);
  const auto secs = standard_secondaries(CorrelationKernel::exp_decay(1e-4, 1.0));
  const TrajectoryRecord r = flow(obj, kTwo, start(7), {}, secs);
  for (std::size_t i = 0; i < secs.size(); ++i) {
    const double a = *secondary_at(r, i, 1e-6), b = *secondary_at(r, i, std::pow(10.0, -7.5));
    EXPECT_LE(std::abs(a - b), 0.05 * std::abs(a) + 1e-9) << secs[i].name;
  }
}

TEST(Interpolation, SecondaryAtAndSAt) {
  TrajectoryRecord r;
  r.secondary_names = {"k"};
  r.samples = {{0.0, 1e-1, 1.0, {10.0}}, {1.0, 1e-3, 1.0, {20.0}}, {2.0, 1e-5, 1.0, {30.0}}};
  EXPECT_NEAR(*secondary_at(r, 0, 1e-2), 15.0, 1e-12);
  EXPECT_NEAR(*s_at(r, 1e-4), 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(*secondary_at(r, 0, 1e-1), 10.0);
  EXPECT_FALSE(secondary_at(r, 0, 0.5).has_value());
  EXPECT_FALSE(secondary_at(r, 0, 1e-6).has_value());
  EXPECT_FALSE(s_at(r, 1e-6).has_value());
  EXPECT_THROW(secondary_at(r, 1, 1e-2), std::out_of_range);
}
