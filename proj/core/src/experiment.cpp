#include "moqc/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "moqc/moea.hpp"

#ifndef MOQC_VERSION
#define MOQC_VERSION "unknown"
#endif

namespace moqc {
namespace fs = std::filesystem;

fs::path resolve_output_directory(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.output_directory) return *opt.output_directory;
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  if (const char* env = std::getenv("MOQC_OUTPUT_DIR"); env && *env) return fs::path(env) / cfg.name;
  return fs::path("moqc-out") / cfg.name;
}

std::uint64_t panel_seed(std::uint64_t seed, std::size_t panel, std::uint64_t stage) {
  return derive_seed(derive_seed(seed, panel), stage);
}

namespace {

constexpr std::uint64_t kStageMc = 1, kStageDmorph = 2, kStageSurface = 3, kStageMoea = 16;

using Cell = Table::Cell;

Cell opt_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::nan("")); }

class Writer {
 public:
  Writer(fs::path root, Delimiter d) : root_(std::move(root)), delim_(d) {}

  void table(const fs::path& rel_stem, const Table& t) {
    fs::path rel = rel_stem;
    rel += table_extension(delim_);
    fs::create_directories((root_ / rel).parent_path());
    t.write(root_ / rel, delim_);
  }

  void text(const fs::path& rel, const std::string& content) {
    fs::create_directories((root_ / rel).parent_path());
    std::ofstream os(root_ / rel, std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + (root_ / rel).string());
  }

 private:
  fs::path root_;
  Delimiter delim_;
};

std::string run_name(std::size_t r) {
  std::ostringstream os;
  os << "run_";
  os.width(5);
  os.fill('0');
  os << r;
  return os.str();
}

Table trajectory_table(const TrajectoryRecord& rec) {
  std::vector<std::string> cols{"s", "e_j", "grad_norm"};
  for (const auto& n : rec.secondary_names) cols.push_back(n);
  Table t(cols);
  for (const auto& smp : rec.samples) {
    std::vector<Cell> row{smp.s, smp.e_j, smp.grad_norm};
    for (double v : smp.secondaries) row.emplace_back(v);
    t.add_row(std::move(row));
  }
  return t;
}

Table snapshot_table(const TrajectoryRecord& rec) {
  Table t({"milestone", "s", "e_j", "spin", "m", "t", "field"});
  auto add = [&](double milestone, double s, double e, const ControlField& f) {
    for (int spin = 0; spin < f.n_spins(); ++spin)
      for (int m = 1; m <= f.grid().n_steps; ++m)
        t.add_row({milestone, s, e, (long long)spin, (long long)m, f.grid().time(m), f.step_value(spin, m)});
  };
  for (const auto& snap : rec.snapshots) add(snap.milestone, snap.s, snap.e_j, snap.field);
  const auto& last = rec.samples.back();
  add(0.0, last.s, last.e_j, rec.final_field);
  return t;
}

Table runs_table(const EnsembleResult& res) {
  std::vector<std::string> cols{"run_id", "status", "converged", "accepted_steps", "rejected_steps",
                                "gradient_evaluations", "s_final", "e_final", "max_uphill"};
  for (const auto& s : res.secondaries) cols.push_back(s.name + "_final");
  Table t(cols);
  for (std::size_t r = 0; r < res.trajectories.size(); ++r) {
    const auto& tr = res.trajectories[r];
    const auto& last = tr.samples.back();
    std::vector<Cell> row{(long long)r,
                          std::string(to_string(tr.status)),
                          (long long)(tr.converged ? 1 : 0),
                          (long long)tr.accepted_steps,
                          (long long)tr.rejected_steps,
                          (long long)tr.gradient_evaluations,
                          last.s,
                          last.e_j,
                          tr.max_uphill};
    for (double v : last.secondaries) row.emplace_back(v);
    t.add_row(std::move(row));
  }
  return t;
}

Table envelope_table(const Envelope& env) {
  std::vector<std::string> cols{"e_j", "log10_e_j", "contributors", "best_run"};
  for (const auto& n : env.names) cols.push_back(n);
  Table t(cols);
  for (std::size_t b = 0; b < env.e_j.size(); ++b) {
    std::vector<Cell> row{env.e_j[b], std::log10(env.e_j[b]), (long long)env.contributors[b],
                          (long long)env.best_run[b]};
    for (const auto& v : env.values) row.push_back(opt_cell(v[b]));
    t.add_row(std::move(row));
  }
  return t;
}

Table front_table(const std::vector<FrontPoint>& pts, const std::vector<std::string>& names,
                  const std::vector<int>& indices) {
  std::vector<std::string> cols{"e_j"};
  for (int i : indices) cols.push_back(names[static_cast<std::size_t>(i)]);
  cols.push_back("run_id");
  cols.push_back("s");
  Table t(cols);
  for (const auto& p : pts) {
    std::vector<Cell> row{p.e_j};
    for (int i : indices) row.emplace_back(p.secondaries[static_cast<std::size_t>(i)]);
    row.emplace_back((long long)p.run_id);
    row.emplace_back(p.s);
    t.add_row(std::move(row));
  }
  return t;
}

Table histogram_table(const Histogram& h) {
  Table t({"lo", "hi", "center", "count"});
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    t.add_row({h.edges[b], h.edges[b + 1], h.center(b), (long long)h.counts[b]});
  return t;
}

FlowConfig flow_for(const PanelConfig& p) { return p.optimizer.flow; }

EnvelopeGrid grid_for(const ExperimentConfig& cfg, const PanelConfig& p) {
  EnvelopeGrid g;
  g.e_max = cfg.analysis.e_max;
  g.e_min = p.optimizer.flow.target_error;
  g.bins_per_decade = cfg.analysis.bins_per_decade;
  return g;
}

void log_line(const RunOptions& opt, const std::string& s) {
  if (opt.log) *opt.log << s << std::endl;
}

void run_mc(const ExperimentConfig& cfg, std::size_t index, const RunOptions& opt, Writer& w) {
  const PanelConfig& p = cfg.panels[index];
  const Objective obj = p.objective.build(p.system);
  const std::vector<SecondarySpec> specs = cfg.noise.secondaries();
  const EnvelopeGrid grid = grid_for(cfg, p);
  log_line(opt, p.name + ": mc ensemble, " + std::to_string(p.optimizer.n_runs) + " runs");
  const EnsembleResult res = mc_ensemble(obj, p.system, p.optimizer.n_runs, p.optimizer.init, flow_for(p), specs,
                                         panel_seed(cfg.seed, index, kStageMc), cfg.threads, grid);
  const fs::path dir = fs::path(p.name) / "mc";
  w.table(dir / "runs", runs_table(res));
  if (cfg.output.trajectories) {
    for (std::size_t r = 0; r < res.trajectories.size(); ++r)
      w.table(dir / "trajectories" / run_name(r), trajectory_table(res.trajectories[r]));
  }
  w.table(dir / "envelope", envelope_table(res.envelope));

  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(s.name);
  Table thr({"secondary", "regime", "found", "e_star", "k_star", "log10_e_star"});
  const std::vector<FrontPoint> samples = trajectory_points(res);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].kind != SecondarySpec::Kind::Robustness) continue;
    const auto tp = threshold_point(res.envelope, i);
    thr.add_row({specs[i].name, res.regime, (long long)(tp ? 1 : 0), tp ? tp->e_star : std::nan(""),
                 tp ? tp->k_star : std::nan(""), tp ? std::log10(tp->e_star) : std::nan("")});
    const int idx[] = {static_cast<int>(i)};
    w.table(dir / ("front_" + specs[i].name), front_table(nondominated_filter(samples, criteria(specs, idx)), names,
                                                          {static_cast<int>(i)}));
  }
  w.table(dir / "thresholds", thr);

  if (cfg.analysis.histogram_log10_e) {
    const double target = std::pow(10.0, *cfg.analysis.histogram_log10_e);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].kind != SecondarySpec::Kind::Robustness) continue;
      try {
        const Histogram h = distribution_at_fidelity(res, i, target, cfg.analysis.histogram_min_runs);
        w.table(dir / ("histogram_" + specs[i].name), histogram_table(h));
      } catch (const InsufficientData& e) {
        log_line(opt, p.name + ": histogram for " + specs[i].name + " skipped: " + e.what());
      }
    }
  }
}

void run_dmorph(const ExperimentConfig& cfg, std::size_t index, const RunOptions& opt, Writer& w) {
  const PanelConfig& p = cfg.panels[index];
  const Objective obj = p.objective.build(p.system);
  const std::vector<SecondarySpec> specs = cfg.noise.secondaries();
  log_line(opt, p.name + ": single flow");
  const ControlField init = p.optimizer.init.sample(p.system, panel_seed(cfg.seed, index, kStageDmorph), 0);
  const TrajectoryRecord rec = flow(obj, p.system, init, flow_for(p), specs);
  const fs::path dir = fs::path(p.name) / "dmorph";
  w.table(dir / "trajectory", trajectory_table(rec));
  w.table(dir / "fields", snapshot_table(rec));
  Table sum({"status", "converged", "accepted_steps", "rejected_steps", "gradient_evaluations", "max_uphill"});
  sum.add_row({std::string(to_string(rec.status)), (long long)(rec.converged ? 1 : 0), (long long)rec.accepted_steps,
               (long long)rec.rejected_steps, (long long)rec.gradient_evaluations, rec.max_uphill});
  w.table(dir / "summary", sum);
}

void run_moea(const ExperimentConfig& cfg, std::size_t index, const RunOptions& opt, Writer& w) {
  const PanelConfig& p = cfg.panels[index];
  const Objective obj = p.objective.build(p.system);
  for (std::size_t c = 0; c < cfg.noise.channels.size(); ++c) {
    const NoiseChannel ch = cfg.noise.channels[c];
    MoeaConfig mc;
    mc.population = p.optimizer.population;
    mc.generations =
        p.optimizer.generations > 0 ? p.optimizer.generations : MoeaConfig::default_generations(p.system);
    mc.init = p.optimizer.init;
    mc.initial_step = p.optimizer.initial_step;
    mc.full_covariance = p.optimizer.full_covariance;
    mc.history_stride = p.optimizer.history_stride;
    mc.seed = panel_seed(cfg.seed, index, kStageMoea + c);
    mc.threads = cfg.threads;
    log_line(opt, p.name + ": moea (" + to_string(ch) + "), " + std::to_string(mc.generations) + " generations");
    const MoeaResult res = moea_run(obj, p.system, {ch, cfg.noise.kernel(0)}, mc);
    const std::string kname = cfg.noise.secondary_name(ch, 0);
    const fs::path dir = fs::path(p.name) / ("moea_" + std::string(to_string(ch)));
    w.table(dir / "front", front_table(res.front, {kname}, {0}));
    Table hist({"generation", "hypervolume", "ref_e_j", "ref_neg_k", "e_j", kname});
    for (const auto& h : res.history)
      for (const auto& pt : h.front)
        hist.add_row({(long long)h.generation, h.hypervolume, h.reference.first, h.reference.second, pt.first,
                      -pt.second});
    w.table(dir / "history", hist);
    std::vector<std::string> cols{"index", "step_size", "success_rate", "e_j", kname};
    const Eigen::Index dim = res.population.front().genome.size();
    for (Eigen::Index g = 0; g < dim; g += 2) {
      const long spin = static_cast<long>(g / (2 * res.n_modes)), k = static_cast<long>((g / 2) % res.n_modes) + 1;
      cols.push_back("a_" + std::to_string(spin) + "_" + std::to_string(k));
      cols.push_back("phi_" + std::to_string(spin) + "_" + std::to_string(k));
    }
    Table pop(cols);
    for (std::size_t i = 0; i < res.population.size(); ++i) {
      const Individual& ind = res.population[i];
      std::vector<Cell> row{(long long)i, ind.step_size, ind.success_rate, ind.fitness.first, -ind.fitness.second};
      for (Eigen::Index g = 0; g < dim; ++g) row.emplace_back(ind.genome(g));
      pop.add_row(std::move(row));
    }
    w.table(dir / "population", pop);
  }
}

void run_surface(const ExperimentConfig& cfg, std::size_t index, const RunOptions& opt, Writer& w) {
  const PanelConfig& p = cfg.panels[index];
  const Objective obj = p.objective.build(p.system);
  log_line(opt, p.name + ": surface, " + std::to_string(p.optimizer.n_runs) + " runs");
  const Surface3D s = surface_3d(obj, p.system, p.optimizer.n_runs, cfg.noise.kernel(0),
                                 panel_seed(cfg.seed, index, kStageSurface), flow_for(p), p.optimizer.init, cfg.threads);
  const std::vector<std::string> names{"K_eps", "fluence"};
  const fs::path dir = fs::path(p.name) / "surface";
  w.table(dir / "surface", front_table(s.surface, names, {0, 1}));
  w.table(dir / "projection_K_eps", front_table(s.robustness, names, {0}));
  w.table(dir / "projection_fluence", front_table(s.fluence, names, {1}));
}

std::string indent(const std::string& text, const std::string& pad) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line)) out += pad + line + "\n";
  return out;
}

std::vector<std::string> list_files(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

extern const char* const kPlotScript;

}  // namespace

ExperimentSummary run_experiment(ExperimentConfig cfg, const RunOptions& opt) {
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads) cfg.threads = *opt.threads;
  cfg.validate();
  const fs::path target = fs::absolute(resolve_output_directory(cfg, opt)).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  std::random_device rd;
  const fs::path tmp = parent / ("." + target.filename().string() + ".tmp-" + std::to_string(rd()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    Writer w(tmp, cfg.output.delimiter);
    for (std::size_t i = 0; i < cfg.panels.size(); ++i) {
      const OptimizerConfig& o = cfg.panels[i].optimizer;
      for (Method m : o.methods) {
        switch (m) {
          case Method::DMorph: run_dmorph(cfg, i, opt, w); break;
          case Method::MonteCarlo: run_mc(cfg, i, opt, w); break;
          case Method::Moea: run_moea(cfg, i, opt, w); break;
          case Method::Surface: run_surface(cfg, i, opt, w); break;
        }
      }
    }
    if (cfg.output.plot_script) w.text("plot.py", kPlotScript);
    const std::vector<std::string> files = list_files(tmp);
    std::ostringstream man;
    man << "moqc_version: \"" << MOQC_VERSION << "\"\n";
    man << "seed: " << cfg.seed << "\n";
    man << "delimiter: " << to_string(cfg.output.delimiter) << "\n";
    man << "files:\n";
    for (const auto& f : files) man << "  - \"" << f << "\"\n";
    man << "config:\n" << indent(to_yaml(cfg), "  ");
    w.text("manifest.yaml", man.str());

    if (fs::exists(target)) fs::remove_all(target);
    fs::rename(tmp, target);
    ExperimentSummary sum{target, list_files(target)};
    return sum;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
}

Table merge_fronts(const std::vector<fs::path>& files) {
  if (files.empty()) throw TableError("merge: no input files");
  std::vector<Table> tables;
  for (const auto& f : files) tables.push_back(Table::read(f));
  const std::vector<std::string> cols = tables.front().columns();
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (tables[i].columns() != cols) throw TableError("merge: header of " + files[i].string() + " differs");
  }
  const std::size_t e_col = tables.front().column("e_j");
  std::vector<Criterion> crit;
  std::vector<std::size_t> objective_cols;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c == e_col || cols[c] == "run_id" || cols[c] == "s" || cols[c] == "source") continue;
    crit.push_back({static_cast<int>(objective_cols.size()), cols[c] != "fluence"});
    objective_cols.push_back(c);
  }
  crit.insert(crit.begin(), Criterion{-1, false});

  std::vector<FrontPoint> pts;
  std::vector<std::pair<std::size_t, std::size_t>> origin;
  for (std::size_t f = 0; f < tables.size(); ++f) {
    for (std::size_t r = 0; r < tables[f].rows(); ++r) {
      FrontPoint p;
      p.e_j = tables[f].number(r, e_col);
      for (std::size_t c : objective_cols) p.secondaries.push_back(tables[f].number(r, c));
      p.run_id = static_cast<int>(origin.size());
      pts.push_back(std::move(p));
      origin.emplace_back(f, r);
    }
  }
  const std::vector<FrontPoint> kept = nondominated_filter(pts, crit);
  std::vector<std::string> out_cols = cols;
  const bool has_source = std::find(cols.begin(), cols.end(), "source") != cols.end();
  if (!has_source) out_cols.push_back("source");
  Table out(out_cols);
  for (const auto& p : kept) {
    const auto [f, r] = origin[static_cast<std::size_t>(p.run_id)];
    std::vector<Cell> row;
    for (std::size_t c = 0; c < cols.size(); ++c) row.emplace_back(tables[f].cell(r, c));
    if (!has_source) row.emplace_back((long long)f);
    out.add_row(std::move(row));
  }
  return out;
}

namespace {

const char* const kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders the tables of one experiment directory with matplotlib.

    python3 plot.py [directory]

Writes PNG files next to the tables. Missing tables are skipped.
"""
import csv
import math
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        text = fh.read().splitlines()
    if not text:
        return {}
    comma = "," in text[0]
    rows = [line.split(",") if comma else line.split() for line in text if line.strip()]
    cols = {name: [] for name in rows[0]}
    for row in rows[1:]:
        for name, value in zip(rows[0], row):
            try:
                cols[name].append(float(value))
            except ValueError:
                cols[name].append(value)
    return cols


def tables(directory, stem):
    return sorted(directory.glob(stem + ".tsv")) + sorted(directory.glob(stem + ".csv"))


def log10(values):
    return [math.log10(v) if isinstance(v, float) and v > 0 else float("nan") for v in values]


def plot_mc(mc):
    env = tables(mc, "envelope")
    if not env:
        return
    e = read(env[0])
    names = [n for n in e if n.startswith("K_")]
    fig, axes = plt.subplots(1, len(names) + 1, figsize=(5 * (len(names) + 1), 4))
    thr = {}
    for path in tables(mc, "thresholds"):
        t = read(path)
        for name, found, e_star, k_star in zip(t["secondary"], t["found"], t["e_star"], t["k_star"]):
            if found == 1.0:
                thr[name] = (e_star, k_star)
    for ax, name in zip(axes, names):
        ax.plot(e["log10_e_j"], e[name], "+-", label=name)
        if name in thr:
            ax.plot([math.log10(thr[name][0])], [thr[name][1]], "ko", label="E = -K")
        ax.set_xlabel("log10 E_J")
        ax.set_ylabel(name)
        ax.invert_xaxis()
        ax.legend()
    if "fluence" in e:
        axes[-1].plot(e["log10_e_j"], e["fluence"], "+-")
        axes[-1].set_xlabel("log10 E_J")
        axes[-1].set_ylabel("fluence")
        axes[-1].invert_xaxis()
    fig.tight_layout()
    fig.savefig(mc / "envelope.png", dpi=120)
    plt.close(fig)
    for path in sorted(mc.glob("histogram_*.*")):
        h = read(path)
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.bar(h["center"], h["count"], width=[b - a for a, b in zip(h["lo"], h["hi"])] or None)
        ax.set_xlabel(path.stem.replace("histogram_", ""))
        ax.set_ylabel("count")
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=120)
        plt.close(fig)


def plot_fronts(panel):
    fronts = sorted((panel / "mc").glob("front_K_*.*")) if (panel / "mc").exists() else []
    moea = sorted(panel.glob("moea_*/front.*"))
    if not fronts and not moea:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in fronts:
        f = read(path)
        name = [n for n in f if n.startswith("K_")][0]
        ax.plot(log10(f["e_j"]), f[name], "-", label="MC " + name)
    for path in moea:
        f = read(path)
        name = [n for n in f if n.startswith("K_")][0]
        ax.plot(log10(f["e_j"]), f[name], ":", label="MOEA " + name)
    ax.set_xlabel("log10 E_J")
    ax.set_ylabel("K")
    ax.invert_xaxis()
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(panel / "fronts.png", dpi=120)
    plt.close(fig)


def plot_surface(surface):
    s = tables(surface, "surface")
    if not s:
        return
    t = read(s[0])
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.scatter(log10(t["e_j"]), t["K_eps"], t["fluence"], s=4)
    for stem, key in (("projection_K_eps", "K_eps"), ("projection_fluence", "fluence")):
        for path in tables(surface, stem):
            p = read(path)
            if key == "K_eps":
                ax.plot(log10(p["e_j"]), p["K_eps"], [max(t["fluence"])] * len(p["e_j"]), "k-")
            else:
                ax.plot(log10(p["e_j"]), [min(t["K_eps"])] * len(p["e_j"]), p["fluence"], "k-")
    ax.set_xlabel("log10 E_J")
    ax.set_ylabel("K_eps")
    ax.set_zlabel("fluence")
    fig.tight_layout()
    fig.savefig(surface / "surface.png", dpi=120)
    plt.close(fig)


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent)
    for panel in sorted(p for p in root.iterdir() if p.is_dir()):
        if (panel / "mc").exists():
            plot_mc(panel / "mc")
        if (panel / "surface").exists():
            plot_surface(panel / "surface")
        plot_fronts(panel)


if __name__ == "__main__":
    main()
)PY";

}  // namespace

}  // namespace moqc
