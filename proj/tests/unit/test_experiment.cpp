#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "moqc/experiment.hpp"

using namespace moqc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("moqc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small_smoke() {
  ExperimentConfig c = load_preset("smoke");
  c.panels[0].optimizer.n_runs = 3;
  c.analysis.histogram_min_runs = 3;
  return c;
}

}  // namespace

TEST(Experiment, WritesExpectedLayout) {
  const fs::path root = scratch("layout");
  RunOptions opt;
  opt.output_directory = root / "out";
  const ExperimentSummary s = run_experiment(small_smoke(), opt);
  EXPECT_EQ(s.directory, fs::absolute(root / "out"));
  for (const char* f : {"manifest.yaml", "plot.py", "smoke/mc/runs.tsv", "smoke/mc/envelope.tsv",
                        "smoke/mc/thresholds.tsv", "smoke/mc/front_K_eps.tsv", "smoke/mc/trajectories/run_00000.tsv",
                        "smoke/dmorph/trajectory.tsv", "smoke/moea_field/front.tsv", "smoke/moea_detuning/history.tsv"})
    EXPECT_TRUE(fs::exists(s.directory / f)) << f;
  EXPECT_TRUE(std::is_sorted(s.files.begin(), s.files.end()));
  // Only the target remains in the parent: no stray temporaries.
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root)) ++entries;
  EXPECT_EQ(entries, 1);
  const Table env = Table::read(s.directory / "smoke/mc/envelope.tsv");
  EXPECT_EQ(env.columns().front(), "e_j");
  EXPECT_EQ(env.rows(), 43u);
  fs::remove_all(root);
}

TEST(Experiment, SerialRerunIsByteIdentical) {
  const fs::path root = scratch("determinism");
  RunOptions a, b, c;
  a.output_directory = root / "a";
  b.output_directory = root / "b";
  c.output_directory = root / "c";
  c.threads = 3;
  const ExperimentSummary sa = run_experiment(small_smoke(), a);
  const ExperimentSummary sb = run_experiment(small_smoke(), b);
  const ExperimentSummary sc = run_experiment(small_smoke(), c);
  ASSERT_EQ(sa.files, sb.files);
  ASSERT_EQ(sa.files, sc.files);
  for (const auto& f : sa.files) {
    EXPECT_EQ(slurp(sa.directory / f), slurp(sb.directory / f)) << f;
    if (f != "manifest.yaml") EXPECT_EQ(slurp(sa.directory / f), slurp(sc.directory / f)) << f;
  }
  fs::remove_all(root);
}

TEST(Experiment, SeedOverrideChangesOutput) {
  const fs::path root = scratch("seed");
  RunOptions a, b;
  a.output_directory = root / "a";
  b.output_directory = root / "b";
  b.seed = 99;
  run_experiment(small_smoke(), a);
  run_experiment(small_smoke(), b);
  EXPECT_NE(slurp(root / "a/smoke/mc/runs.tsv"), slurp(root / "b/smoke/mc/runs.tsv"));
  fs::remove_all(root);
}

TEST(Experiment, InvalidConfigLeavesNoOutput) {
  const fs::path root = scratch("invalid");
  ExperimentConfig c = small_smoke();
  c.threads = 0;
  RunOptions opt;
  opt.output_directory = root / "out";
  EXPECT_THROW(run_experiment(c, opt), ConfigError);
  EXPECT_FALSE(fs::exists(root / "out"));
  // An existing result survives a failed rerun.
  fs::create_directories(root / "keep");
  std::ofstream(root / "keep" / "marker") << "x";
  opt.output_directory = root / "keep";
  EXPECT_THROW(run_experiment(c, opt), ConfigError);
  EXPECT_TRUE(fs::exists(root / "keep" / "marker"));
  fs::remove_all(root);
}

TEST(Experiment, ResolveOutputDirectory) {
  ExperimentConfig c;
  c.name = "nm";
  RunOptions opt;
  ::setenv("MOQC_OUTPUT_DIR", "/tmp/envdir", 1);
  EXPECT_EQ(resolve_output_directory(c, opt), fs::path("/tmp/envdir/nm"));
  c.output.directory = "/x/y";
  EXPECT_EQ(resolve_output_directory(c, opt), fs::path("/x/y"));
  opt.output_directory = "/z";
  EXPECT_EQ(resolve_output_directory(c, opt), fs::path("/z"));
  ::unsetenv("MOQC_OUTPUT_DIR");
  c.output.directory.clear();
  opt.output_directory.reset();
  EXPECT_EQ(resolve_output_directory(c, opt), fs::path("moqc-out/nm"));
}

TEST(Experiment, PanelSeedsDistinct) {
  EXPECT_NE(panel_seed(1, 0, 1), panel_seed(1, 1, 1));
  EXPECT_NE(panel_seed(1, 0, 1), panel_seed(1, 0, 2));
  EXPECT_EQ(panel_seed(5, 2, 3), panel_seed(5, 2, 3));
}

TEST(Experiment, MergeFronts) {
  const fs::path root = scratch("merge");
  Table a({"e_j", "K_eps", "fluence", "run_id"});
  a.add_row({1e-3, -5e-6, 0.5, 0LL});
  a.add_row({1e-6, -3e-5, 0.4, 1LL});
  Table b({"e_j", "K_eps", "fluence", "run_id"});
  b.add_row({1e-6, -1e-5, 0.3, 0LL});  // dominates a's second row
  b.add_row({1e-2, -4e-5, 0.9, 1LL});  // dominated by a's first row
  a.write(root / "a.tsv", Delimiter::Whitespace);
  b.write(root / "b.tsv", Delimiter::Whitespace);
  const Table m = merge_fronts({root / "a.tsv", root / "b.tsv"});
  EXPECT_EQ(m.columns().back(), "source");
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.number(0, 0), 1e-6);
  EXPECT_EQ(m.number(0, 1), -1e-5);
  EXPECT_EQ(m.number(1, 0), 1e-3);
  Table c({"e_j", "other"});
  c.add_row({0.1, 1.0});
  c.write(root / "c.tsv", Delimiter::Whitespace);
  EXPECT_THROW(merge_fronts({root / "a.tsv", root / "c.tsv"}), TableError);
  EXPECT_THROW(merge_fronts({}), TableError);
  fs::remove_all(root);
}
