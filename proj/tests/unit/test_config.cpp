#include <gtest/gtest.h>

#include <filesystem>

#include "moqc/config.hpp"

using namespace moqc;

namespace {

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text, "t.yaml");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigError("none");
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const ExperimentConfig c = parse_config("name: x\nsystem: two_level\nobjective: {kind: state_transfer}\n");
  ASSERT_EQ(c.panels.size(), 1u);
  EXPECT_EQ(c.panels[0].system.n_spins, 1);
  EXPECT_EQ(c.panels[0].objective.kind, "state_transfer");
  EXPECT_EQ(c.noise.alphas, std::vector<double>{1.0});
  EXPECT_EQ(c.noise.secondaries().size(), 3u);
  EXPECT_EQ(c.noise.secondaries()[0].name, "K_eps");
  EXPECT_EQ(c.noise.secondaries().back().name, "fluence");
}

TEST(Config, AlphaNames) {
  const ExperimentConfig c = parse_config("system: two_level\nobjective: {kind: observable}\nnoise: {alphas: [1.0, 2.0]}\n");
  const auto s = c.noise.secondaries();
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[2].name, "K_eps_alpha2");
  EXPECT_EQ(s[3].name, "K_omega_alpha2");
  EXPECT_DOUBLE_EQ(s[2].model.kernel.alpha, 2.0);
}

TEST(Config, PanelsInheritAndOverride) {
  const ExperimentConfig c = parse_config(R"(
system: four_level
optimizer: {methods: [mc], n_runs: 5}
panels:
  - name: a
    objective: {kind: gate, gate: cnot}
  - name: b
    system: two_level
    objective: {kind: observable}
    optimizer: {n_runs: 7}
)");
  ASSERT_EQ(c.panels.size(), 2u);
  EXPECT_EQ(c.panels[0].system.n_spins, 2);
  EXPECT_EQ(c.panels[0].optimizer.n_runs, 5);
  EXPECT_EQ(c.panels[1].system.n_spins, 1);
  EXPECT_EQ(c.panels[1].optimizer.n_runs, 7);
  EXPECT_TRUE(c.panels[1].optimizer.has(Method::MonteCarlo));
}

TEST(Config, RoundTripIsFixedPoint) {
  const auto dir = preset_directory();
  ASSERT_TRUE(dir.has_value());
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(*dir)) {
    if (entry.path().extension() != ".yaml") continue;
    ++n;
    const ExperimentConfig c = load_config(entry.path());
    const std::string text = to_yaml(c);
    const ExperimentConfig back = parse_config(text, "roundtrip");
    EXPECT_EQ(to_yaml(back), text) << entry.path();
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.panels.size(), c.panels.size());
  }
  EXPECT_GE(n, 5);
}

TEST(Config, PresetsLoadByName) {
  for (const char* name : {"smoke", "fig1-mc-pif", "fig1-inset-2000", "fig2-grid", "fig3-surface"})
    EXPECT_NO_THROW(load_preset(name)) << name;
  EXPECT_THROW(load_preset("no-such-preset"), ConfigError);
}

TEST(Config, UnknownKeyReportsFieldAndLine) {
  const ConfigError e = parse_error("name: x\nsystem: two_level\noptimizer:\n  n_runz: 3\n");
  EXPECT_EQ(e.field(), "optimizer.n_runz");
  EXPECT_EQ(e.line(), 4);
  EXPECT_NE(std::string(e.what()).find("t.yaml:4"), std::string::npos);
}

TEST(Config, RejectsInvalidCombinations) {
  EXPECT_NE(std::string(parse_error("system: two_level\nobjective: {kind: gate, gate: cnot}\n").what()).find("cnot"),
            std::string::npos);
  parse_error("system: four_level\nobjective: {kind: gate, gate: hadamard}\n");
  parse_error("system: two_level\nobjective: {kind: state_transfer, from: 1, to: 3}\n");
  parse_error("system: four_level\noptimizer: {methods: [surface]}\n");
  parse_error("system: two_level\noptimizer: {n_modes: 11}\n");
  parse_error("system: two_level\noptimizer: {methods: [gradient_descent]}\n");
  parse_error("system: two_level\nnoise: {form: custom}\n");
  parse_error("system: two_level\nnoise: {alphas: [-1.0]}\n");
  parse_error("system: two_level\nanalysis: {e_max: 1.0e-9}\n");
  parse_error("system: three_level\n");
  parse_error("system: two_level\nthreads: 0\n");
  parse_error("system: two_level\nseed: banana\n");
  parse_error("system: two_level\n");
  parse_error("");
  parse_error("system: [unclosed\n");
}

TEST(Config, CustomSystemMap) {
  const ExperimentConfig c = parse_config(
      "system: {n_spins: 2, omegas: [20.0, 25.0], coupling: 0.1, total_time: 6.0, n_steps: 50}\n"
      "objective: {kind: gate, gate: cnot}\n");
  const SpinSystem& s = c.panels[0].system;
  EXPECT_EQ(s.grid.n_steps, 50);
  EXPECT_DOUBLE_EQ(s.grid.dt, 0.12);
  EXPECT_DOUBLE_EQ(s.omegas[1], 25.0);
}

TEST(Config, GatePhaseOption) {
  const ExperimentConfig c = parse_config("system: two_level\nobjective: {kind: gate, gate: hadamard, phase: as_given}\n");
  EXPECT_EQ(c.panels[0].objective.phase, GatePhase::AsGiven);
  const Objective o = c.panels[0].objective.build(c.panels[0].system);
  EXPECT_EQ(o.kind(), ObjectiveKind::GateFidelity);
}
