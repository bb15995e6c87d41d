#include <benchmark/benchmark.h>

#include "moqc/dmorph.hpp"
#include "moqc/moea.hpp"

using namespace moqc;

namespace {

SpinSystem system_for(benchmark::State& st) {
  return st.range(0) == 2 ? SpinSystem::two_level() : SpinSystem::four_level();
}

Objective objective_for(const SpinSystem& s) { return s.n_spins == 1 ? Objective::hadamard() : Objective::cnot(); }

ControlField field_for(const SpinSystem& s) {
  return sample_random_field(AmplitudeRange::low_fluence(), s, s.max_fourier_mode(), 1).to_samples();
}

void BM_Propagate(benchmark::State& st) {
  const SpinSystem s = system_for(st);
  const ControlField f = field_for(s);
  for (auto _ : st) benchmark::DoNotOptimize(propagate(s, f));
}

void BM_Gradient(benchmark::State& st) {
  const SpinSystem s = system_for(st);
  const Objective obj = objective_for(s);
  const ControlField f = field_for(s);
  for (auto _ : st) benchmark::DoNotOptimize(gradient(obj, s, f));
}

void BM_Hessian(benchmark::State& st) {
  const SpinSystem s = system_for(st);
  const Objective obj = objective_for(s);
  const ControlField f = field_for(s);
  for (auto _ : st) benchmark::DoNotOptimize(hessian(obj, s, f, NoiseChannel::Field, 0));
}

void BM_KBetaTotal(benchmark::State& st) {
  const SpinSystem s = system_for(st);
  const Objective obj = objective_for(s);
  const ControlField f = field_for(s);
  const PropagatorHistory h = propagate(s, f);
  const NoiseModel m{NoiseChannel::Field, CorrelationKernel::exp_decay(1e-4, 1.0)};
  for (auto _ : st) benchmark::DoNotOptimize(k_beta_total(obj, s, h, m));
}

void BM_MoeaFitness(benchmark::State& st) {
  const SpinSystem s = system_for(st);
  const Objective obj = objective_for(s);
  const ControlField f = sample_random_field(AmplitudeRange::low_fluence(), s, s.max_fourier_mode(), 1);
  const NoiseModel m{NoiseChannel::Detuning, CorrelationKernel::exp_decay(1e-4, 1.0)};
  for (auto _ : st) benchmark::DoNotOptimize(moea_fitness(obj, s, m, f));
}

void BM_Flow(benchmark::State& st) {
  const SpinSystem s = SpinSystem::two_level();
  const Objective obj = Objective::state_transfer(s, 1, 2);
  const auto specs = standard_secondaries(CorrelationKernel::exp_decay(1e-4, 1.0));
  const ControlField f = sample_random_field(AmplitudeRange::low_fluence(), s, 10, 3);
  for (auto _ : st) benchmark::DoNotOptimize(flow(obj, s, f, {}, specs));
}

}  // namespace

BENCHMARK(BM_Propagate)->Arg(2)->Arg(4);
BENCHMARK(BM_Gradient)->Arg(2)->Arg(4);
BENCHMARK(BM_Hessian)->Arg(2)->Arg(4);
BENCHMARK(BM_KBetaTotal)->Arg(2)->Arg(4);
BENCHMARK(BM_MoeaFitness)->Arg(2)->Arg(4);
BENCHMARK(BM_Flow)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
