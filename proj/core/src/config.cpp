#include "moqc/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace moqc {

ConfigError::ConfigError(const std::string& message, std::string field, int line)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

const char* to_string(Method m) {
  switch (m) {
    case Method::DMorph: return "dmorph";
    case Method::MonteCarlo: return "mc";
    case Method::Moea: return "moea";
    case Method::Surface: return "surface";
  }
  return "?";
}

bool OptimizerConfig::has(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

Objective ObjectiveConfig::build(const SpinSystem& sys) const {
  if (kind == "state_transfer") return Objective::state_transfer(sys, from, to);
  if (kind == "observable") return Objective::sigma_x(sys);
  if (gate == "hadamard") return Objective::hadamard(phase);
  return Objective::cnot(phase);
}

CorrelationKernel NoiseConfig::kernel(std::size_t alpha_index) const {
  switch (form) {
    case CorrelationKernel::Form::ExpDecay: return CorrelationKernel::exp_decay(a2, alphas.at(alpha_index));
    case CorrelationKernel::Form::White: return CorrelationKernel::white(a2);
    case CorrelationKernel::Form::Custom: return CorrelationKernel::custom(table);
  }
  return {};
}

std::string NoiseConfig::secondary_name(NoiseChannel c, std::size_t alpha_index) const {
  std::string name = c == NoiseChannel::Field ? "K_eps" : "K_omega";
  if (alpha_index > 0) name += "_alpha" + format_number(alphas.at(alpha_index));
  return name;
}

std::vector<SecondarySpec> NoiseConfig::secondaries() const {
  std::vector<SecondarySpec> out;
  const std::size_t n_alpha = form == CorrelationKernel::Form::ExpDecay ? alphas.size() : 1;
  for (std::size_t a = 0; a < n_alpha; ++a)
    for (NoiseChannel c : channels) out.push_back(SecondarySpec::robustness(secondary_name(c, a), {c, kernel(a)}));
  out.push_back(SecondarySpec::fluence());
  return out;
}

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const std::string& source, const std::string& field, int line, const std::string& msg) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ":" << line;
  os << ": " << (field.empty() ? "" : field + ": ") << msg;
  throw ConfigError(os.str(), field, line);
}

// Map view that records which keys were read and rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(source_, path_, line_of(node_), "expected a mapping");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) fail(source_, field(k), line_of(kv.first), "unknown key");
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }
  YAML::Node raw(const char* key) const { return node_[key]; }
  std::string field(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }
  const std::string& source() const { return source_; }
  int line() const { return line_of(node_); }

  Section child(const char* key) const { return Section(node_[key], field(key), source_); }

  template <typename T>
  T get(const char* key, T fallback) const {
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    return convert<T>(n, field(key));
  }

  template <typename T>
  T convert(const YAML::Node& n, const std::string& f) const {
    if (!n.IsScalar()) fail(source_, f, line_of(n), "expected a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(source_, f, line_of(n), "cannot read '" + n.Scalar() + "'");
    }
  }

  template <typename T>
  std::vector<T> list(const char* key, std::vector<T> fallback) const {
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    if (n.IsScalar()) return {convert<T>(n, field(key))};
    if (!n.IsSequence()) fail(source_, field(key), line_of(n), "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert<T>(n[i], field(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  [[noreturn]] void error(const char* key, const std::string& msg) const {
    const YAML::Node n = node_[key];
    fail(source_, field(key), n ? line_of(n) : line(), msg);
  }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
};

NoiseChannel parse_channel(const Section& s, const std::string& v) {
  if (v == "field") return NoiseChannel::Field;
  if (v == "detuning") return NoiseChannel::Detuning;
  s.error("channels", "unknown channel '" + v + "' (field | detuning)");
}

Method parse_method(const Section& s, const std::string& v) {
  if (v == "dmorph") return Method::DMorph;
  if (v == "mc") return Method::MonteCarlo;
  if (v == "moea") return Method::Moea;
  if (v == "surface") return Method::Surface;
  s.error("methods", "unknown method '" + v + "' (dmorph | mc | moea | surface)");
}

SpinSystem parse_system(const YAML::Node& node, const std::string& path, const std::string& source) {
  if (node.IsScalar()) {
    const std::string v = node.as<std::string>();
    if (v == "two_level") return SpinSystem::two_level();
    if (v == "four_level") return SpinSystem::four_level();
    fail(source, path, line_of(node), "unknown system preset '" + v + "' (two_level | four_level)");
  }
  const Section s(node, path, source);
  s.allow({"n_spins", "omegas", "coupling", "total_time", "n_steps"});
  SpinSystem sys;
  sys.n_spins = s.get<int>("n_spins", 1);
  if (sys.n_spins != 1 && sys.n_spins != 2) s.error("n_spins", "must be 1 or 2");
  const SpinSystem base = sys.n_spins == 1 ? SpinSystem::two_level() : SpinSystem::four_level();
  sys.omegas = s.list<double>("omegas", base.omegas);
  sys.coupling = s.get<double>("coupling", base.coupling);
  const double total = s.get<double>("total_time", base.grid.total_time);
  const int steps = s.get<int>("n_steps", base.grid.n_steps);
  if (!(total > 0.0)) s.error("total_time", "must be > 0");
  if (steps < 1) s.error("n_steps", "must be >= 1");
  sys.grid = TimeGrid::make(total, steps);
  try {
    sys.validate();
  } catch (const std::exception& e) {
    fail(source, path, s.line(), e.what());
  }
  return sys;
}

ObjectiveConfig parse_objective(const Section& s) {
  s.allow({"kind", "from", "to", "observable", "gate", "phase"});
  ObjectiveConfig o;
  o.kind = s.get<std::string>("kind", o.kind);
  if (o.kind == "state_transfer") {
    o.from = s.get<int>("from", o.from);
    o.to = s.get<int>("to", o.to);
  } else if (o.kind == "observable") {
    o.observable = s.get<std::string>("observable", o.observable);
    if (o.observable != "sigma_x") s.error("observable", "only sigma_x is supported");
  } else if (o.kind == "gate") {
    o.gate = s.get<std::string>("gate", o.gate);
    if (o.gate != "hadamard" && o.gate != "cnot") s.error("gate", "expected hadamard or cnot");
    const std::string ph = s.get<std::string>("phase", "special_unitary");
    if (ph == "special_unitary") {
      o.phase = GatePhase::SpecialUnitary;
    } else if (ph == "as_given") {
      o.phase = GatePhase::AsGiven;
    } else {
      s.error("phase", "expected special_unitary or as_given");
    }
  } else {
    s.error("kind", "unknown objective kind '" + o.kind + "' (state_transfer | observable | gate)");
  }
  const auto check_unused = [&](const char* key) {
    if (s.has(key)) s.error(key, "not used by objective kind '" + o.kind + "'");
  };
  if (o.kind != "state_transfer") {
    check_unused("from");
    check_unused("to");
  }
  if (o.kind != "observable") check_unused("observable");
  if (o.kind != "gate") {
    check_unused("gate");
    check_unused("phase");
  }
  return o;
}

FlowConfig parse_flow(const Section& s, FlowConfig f) {
  s.allow({"target_error", "s_max", "rel_tol", "abs_tol", "record_stride", "stall_threshold", "initial_step",
           "max_steps"});
  f.target_error = s.get<double>("target_error", f.target_error);
  f.s_max = s.get<double>("s_max", f.s_max);
  f.rel_tol = s.get<double>("rel_tol", f.rel_tol);
  f.abs_tol = s.get<double>("abs_tol", f.abs_tol);
  f.record_stride = s.get<int>("record_stride", f.record_stride);
  f.stall_threshold = s.get<double>("stall_threshold", f.stall_threshold);
  f.initial_step = s.get<double>("initial_step", f.initial_step);
  f.max_steps = s.get<long>("max_steps", f.max_steps);
  try {
    f.validate();
  } catch (const std::exception& e) {
    fail(s.source(), s.field(""), s.line(), e.what());
  }
  return f;
}

OptimizerConfig parse_optimizer(const Section& s, OptimizerConfig o) {
  s.allow({"methods", "n_runs", "init", "n_modes", "flow", "moea"});
  if (s.has("methods")) {
    o.methods.clear();
    for (const auto& m : s.list<std::string>("methods", {})) {
      const Method v = parse_method(s, m);
      if (o.has(v)) s.error("methods", "duplicate method '" + m + "'");
      o.methods.push_back(v);
    }
    if (o.methods.empty()) s.error("methods", "at least one method required");
  }
  o.n_runs = s.get<int>("n_runs", o.n_runs);
  if (o.n_runs < 1) s.error("n_runs", "must be >= 1");
  if (s.has("init")) {
    const std::string init = s.get<std::string>("init", "");
    const int modes = o.init.n_modes;
    if (init == "low_fluence") {
      o.init = InitSampler::low_fluence();
    } else if (init == "high_fluence") {
      o.init = InitSampler::high_fluence();
    } else {
      s.error("init", "expected low_fluence or high_fluence");
    }
    o.init.n_modes = modes;
  }
  o.init.n_modes = s.get<int>("n_modes", o.init.n_modes);
  if (o.init.n_modes < 0) s.error("n_modes", "must be >= 0 (0 selects the frequency cap)");
  if (s.has("flow")) o.flow = parse_flow(s.child("flow"), o.flow);
  if (s.has("moea")) {
    const Section m = s.child("moea");
    m.allow({"population", "generations", "initial_step", "full_covariance", "history_stride"});
    o.population = m.get<int>("population", o.population);
    o.generations = m.get<int>("generations", o.generations);
    o.initial_step = m.get<double>("initial_step", o.initial_step);
    o.full_covariance = m.get<bool>("full_covariance", o.full_covariance);
    o.history_stride = m.get<int>("history_stride", o.history_stride);
    if (o.population < 2) m.error("population", "must be >= 2");
    if (o.generations < 0) m.error("generations", "must be >= 0");
    if (!(o.initial_step >= 0.0)) m.error("initial_step", "must be >= 0");
    if (o.history_stride < 1) m.error("history_stride", "must be >= 1");
  }
  return o;
}

NoiseConfig parse_noise(const Section& s) {
  s.allow({"form", "a2", "alphas", "channels", "table"});
  NoiseConfig n;
  const std::string form = s.get<std::string>("form", "exp_decay");
  if (form == "exp_decay") {
    n.form = CorrelationKernel::Form::ExpDecay;
  } else if (form == "white") {
    n.form = CorrelationKernel::Form::White;
  } else if (form == "custom") {
    n.form = CorrelationKernel::Form::Custom;
  } else {
    s.error("form", "expected exp_decay, white or custom");
  }
  n.a2 = s.get<double>("a2", n.a2);
  if (!(n.a2 >= 0.0)) s.error("a2", "must be >= 0");
  n.alphas = s.list<double>("alphas", n.alphas);
  if (n.alphas.empty()) s.error("alphas", "at least one value required");
  for (double a : n.alphas)
    if (!(a > 0.0)) s.error("alphas", "correlation times must be > 0");
  if (n.form != CorrelationKernel::Form::ExpDecay && s.has("alphas")) s.error("alphas", "only used by exp_decay");
  if (s.has("channels")) {
    n.channels.clear();
    for (const auto& c : s.list<std::string>("channels", {})) {
      const NoiseChannel ch = parse_channel(s, c);
      if (std::find(n.channels.begin(), n.channels.end(), ch) != n.channels.end()) {
        s.error("channels", "duplicate channel '" + c + "'");
      }
      n.channels.push_back(ch);
    }
    if (n.channels.empty()) s.error("channels", "at least one channel required");
  }
  if (n.form == CorrelationKernel::Form::Custom) {
    const YAML::Node t = s.raw("table");
    if (!t || !t.IsSequence() || t.size() == 0) s.error("table", "custom kernel needs a square table");
    const std::size_t rows = t.size();
    n.table.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      if (!t[i].IsSequence() || t[i].size() != rows) s.error("table", "custom kernel needs a square table");
      for (std::size_t j = 0; j < rows; ++j)
        n.table(i, j) = s.convert<double>(t[i][j], s.field("table"));
    }
    try {
      n.kernel().validate();
    } catch (const std::exception& e) {
      s.error("table", e.what());
    }
  } else if (s.has("table")) {
    s.error("table", "only used by the custom form");
  }
  return n;
}

void check_panel(const PanelConfig& p, const std::string& path, const std::string& source, int line,
                 const NoiseConfig& noise) {
  const int dim = p.system.dim();
  const ObjectiveConfig& o = p.objective;
  const auto bad = [&](const std::string& msg) { fail(source, path, line, msg); };
  if (o.kind == "state_transfer") {
    if (o.from < 1 || o.from > dim || o.to < 1 || o.to > dim) {
      bad("state_transfer levels must lie in 1.." + std::to_string(dim) + " for a " +
          std::to_string(p.system.n_spins) + "-spin system");
    }
    if (o.from == o.to) bad("state_transfer needs distinct levels");
  }
  if (o.kind == "gate") {
    const int need = o.gate == "hadamard" ? 1 : 2;
    if (p.system.n_spins != need) bad(o.gate + " gate needs a " + std::to_string(need) + "-spin system");
  }
  if (p.optimizer.init.n_modes > p.system.max_fourier_mode()) {
    bad("n_modes exceeds the frequency cap " + std::to_string(p.system.max_fourier_mode()));
  }
  if (p.optimizer.has(Method::Surface) && p.system.n_spins != 1) bad("surface requires a one-spin system");
  if (noise.form == CorrelationKernel::Form::Custom && noise.table.rows() != p.system.grid.n_steps) {
    bad("custom kernel table size does not match the time grid");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (panels.empty()) throw ConfigError("config: no panels");
  std::set<std::string> names;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const std::string path = "panels[" + std::to_string(i) + "]";
    check_panel(panels[i], path, "config", 0, noise);
    if (!names.insert(panels[i].name).second) throw ConfigError("config: duplicate panel name " + panels[i].name, path);
  }
  if (threads < 1) throw ConfigError("config: threads must be >= 1", "threads");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(source, "", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) fail(source, "", 0, "empty configuration");
  const Section top(root, "", source);
  top.allow({"name", "seed", "threads", "system", "objective", "noise", "optimizer", "analysis", "output", "panels"});

  ExperimentConfig cfg;
  cfg.name = top.get<std::string>("name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\ \t") != std::string::npos) {
    top.error("name", "must be non-empty without slashes or spaces");
  }
  cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
  cfg.threads = top.get<int>("threads", cfg.threads);
  if (cfg.threads < 1) top.error("threads", "must be >= 1");
  if (top.has("noise")) cfg.noise = parse_noise(top.child("noise"));

  if (top.has("analysis")) {
    const Section a = top.child("analysis");
    a.allow({"histogram_log10_e", "histogram_min_runs", "bins_per_decade", "e_max"});
    if (a.has("histogram_log10_e")) cfg.analysis.histogram_log10_e = a.get<double>("histogram_log10_e", 0.0);
    cfg.analysis.histogram_min_runs = a.get<int>("histogram_min_runs", cfg.analysis.histogram_min_runs);
    cfg.analysis.bins_per_decade = a.get<int>("bins_per_decade", cfg.analysis.bins_per_decade);
    cfg.analysis.e_max = a.get<double>("e_max", cfg.analysis.e_max);
    if (cfg.analysis.bins_per_decade < 1) a.error("bins_per_decade", "must be >= 1");
    if (!(cfg.analysis.e_max > 0.0 && cfg.analysis.e_max <= 1.0)) a.error("e_max", "must lie in (0, 1]");
    if (cfg.analysis.histogram_min_runs < 1) a.error("histogram_min_runs", "must be >= 1");
  }
  if (top.has("output")) {
    const Section o = top.child("output");
    o.allow({"directory", "delimiter", "plot_script", "trajectories"});
    cfg.output.directory = o.get<std::string>("directory", "");
    try {
      cfg.output.delimiter = delimiter_from_string(o.get<std::string>("delimiter", "whitespace"));
    } catch (const TableError& e) {
      o.error("delimiter", e.what());
    }
    cfg.output.plot_script = o.get<bool>("plot_script", cfg.output.plot_script);
    cfg.output.trajectories = o.get<bool>("trajectories", cfg.output.trajectories);
  }

  std::optional<SpinSystem> default_system;
  std::optional<ObjectiveConfig> default_objective;
  OptimizerConfig default_optimizer;
  if (top.has("system")) default_system = parse_system(top.raw("system"), "system", source);
  if (top.has("objective")) default_objective = parse_objective(top.child("objective"));
  if (top.has("optimizer")) default_optimizer = parse_optimizer(top.child("optimizer"), default_optimizer);

  const auto finish = [&](PanelConfig p, const std::string& path, int line) {
    if (p.optimizer.flow.target_error > cfg.analysis.e_max) {
      fail(source, path, line, "flow.target_error must not exceed analysis.e_max");
    }
    check_panel(p, path, source, line, cfg.noise);
    cfg.panels.push_back(std::move(p));
  };

  if (top.has("panels")) {
    const YAML::Node list = top.raw("panels");
    if (!list.IsSequence() || list.size() == 0) top.error("panels", "expected a non-empty list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "panels[" + std::to_string(i) + "]";
      const Section ps(list[i], path, source);
      ps.allow({"name", "system", "objective", "optimizer"});
      PanelConfig p;
      p.name = ps.get<std::string>("name", "");
      if (p.name.empty() || p.name.find_first_of("/\\ \t") != std::string::npos) {
        ps.error("name", "panel name required, without slashes or spaces");
      }
      if (!names.insert(p.name).second) ps.error("name", "duplicate panel name '" + p.name + "'");
      if (ps.has("system")) {
        p.system = parse_system(ps.raw("system"), ps.field("system"), source);
      } else if (default_system) {
        p.system = *default_system;
      } else {
        ps.error("system", "missing (no top-level default)");
      }
      if (ps.has("objective")) {
        p.objective = parse_objective(ps.child("objective"));
      } else if (default_objective) {
        p.objective = *default_objective;
      } else {
        ps.error("objective", "missing (no top-level default)");
      }
      p.optimizer = ps.has("optimizer") ? parse_optimizer(ps.child("optimizer"), default_optimizer) : default_optimizer;
      finish(std::move(p), path, ps.line());
    }
  } else {
    if (!default_system) top.error("system", "missing");
    if (!default_objective) top.error("objective", "missing");
    PanelConfig p{cfg.name, *default_system, *default_objective, default_optimizer};
    finish(std::move(p), "", top.line());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path.string() + ": cannot open configuration file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

const char* form_name(CorrelationKernel::Form f) { return to_string(f); }

}  // namespace

std::string to_yaml(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto num = [](double v) { return format_number(v); };
  os << "name: " << quoted(cfg.name) << "\n";
  os << "seed: " << cfg.seed << "\n";
  os << "threads: " << cfg.threads << "\n";
  os << "noise:\n";
  os << "  form: " << form_name(cfg.noise.form) << "\n";
  os << "  a2: " << num(cfg.noise.a2) << "\n";
  if (cfg.noise.form == CorrelationKernel::Form::ExpDecay) {
    os << "  alphas: [";
    for (std::size_t i = 0; i < cfg.noise.alphas.size(); ++i) os << (i ? ", " : "") << num(cfg.noise.alphas[i]);
    os << "]\n";
  }
  os << "  channels: [";
  for (std::size_t i = 0; i < cfg.noise.channels.size(); ++i) os << (i ? ", " : "") << to_string(cfg.noise.channels[i]);
  os << "]\n";
  if (cfg.noise.form == CorrelationKernel::Form::Custom) {
    os << "  table:\n";
    for (Eigen::Index i = 0; i < cfg.noise.table.rows(); ++i) {
      os << "    - [";
      for (Eigen::Index j = 0; j < cfg.noise.table.cols(); ++j) os << (j ? ", " : "") << num(cfg.noise.table(i, j));
      os << "]\n";
    }
  }
  os << "analysis:\n";
  if (cfg.analysis.histogram_log10_e) os << "  histogram_log10_e: " << num(*cfg.analysis.histogram_log10_e) << "\n";
  os << "  histogram_min_runs: " << cfg.analysis.histogram_min_runs << "\n";
  os << "  bins_per_decade: " << cfg.analysis.bins_per_decade << "\n";
  os << "  e_max: " << num(cfg.analysis.e_max) << "\n";
  os << "output:\n";
  os << "  directory: " << quoted(cfg.output.directory) << "\n";
  os << "  delimiter: " << to_string(cfg.output.delimiter) << "\n";
  os << "  plot_script: " << (cfg.output.plot_script ? "true" : "false") << "\n";
  os << "  trajectories: " << (cfg.output.trajectories ? "true" : "false") << "\n";
  os << "panels:\n";
  for (const auto& p : cfg.panels) {
    os << "  - name: " << quoted(p.name) << "\n";
    os << "    system:\n";
    os << "      n_spins: " << p.system.n_spins << "\n";
    os << "      omegas: [";
    for (std::size_t i = 0; i < p.system.omegas.size(); ++i) os << (i ? ", " : "") << num(p.system.omegas[i]);
    os << "]\n";
    os << "      coupling: " << num(p.system.coupling) << "\n";
    os << "      total_time: " << num(p.system.grid.total_time) << "\n";
    os << "      n_steps: " << p.system.grid.n_steps << "\n";
    const ObjectiveConfig& o = p.objective;
    os << "    objective:\n";
    os << "      kind: " << o.kind << "\n";
    if (o.kind == "state_transfer") os << "      from: " << o.from << "\n      to: " << o.to << "\n";
    if (o.kind == "observable") os << "      observable: " << o.observable << "\n";
    if (o.kind == "gate") {
      os << "      gate: " << o.gate << "\n";
      os << "      phase: " << (o.phase == GatePhase::SpecialUnitary ? "special_unitary" : "as_given") << "\n";
    }
    const OptimizerConfig& op = p.optimizer;
    os << "    optimizer:\n";
    os << "      methods: [";
    for (std::size_t i = 0; i < op.methods.size(); ++i) os << (i ? ", " : "") << to_string(op.methods[i]);
    os << "]\n";
    os << "      n_runs: " << op.n_runs << "\n";
    os << "      init: " << op.init.regime << "\n";
    os << "      n_modes: " << op.init.n_modes << "\n";
    os << "      flow:\n";
    os << "        target_error: " << num(op.flow.target_error) << "\n";
    os << "        s_max: " << num(op.flow.s_max) << "\n";
    os << "        rel_tol: " << num(op.flow.rel_tol) << "\n";
    os << "        abs_tol: " << num(op.flow.abs_tol) << "\n";
    os << "        record_stride: " << op.flow.record_stride << "\n";
    os << "        stall_threshold: " << num(op.flow.stall_threshold) << "\n";
    os << "        initial_step: " << num(op.flow.initial_step) << "\n";
    os << "        max_steps: " << op.flow.max_steps << "\n";
    os << "      moea:\n";
    os << "        population: " << op.population << "\n";
    os << "        generations: " << op.generations << "\n";
    os << "        initial_step: " << num(op.initial_step) << "\n";
    os << "        full_covariance: " << (op.full_covariance ? "true" : "false") << "\n";
    os << "        history_stride: " << op.history_stride << "\n";
  }
  return os.str();
}

std::optional<std::filesystem::path> preset_directory() {
  if (const char* env = std::getenv("MOQC_PRESET_DIR"); env && *env) return std::filesystem::path(env);
#ifdef MOQC_PRESET_DIR
  if (std::filesystem::is_directory(MOQC_PRESET_DIR)) return std::filesystem::path(MOQC_PRESET_DIR);
#endif
#ifdef MOQC_INSTALLED_PRESET_DIR
  if (std::filesystem::is_directory(MOQC_INSTALLED_PRESET_DIR)) return std::filesystem::path(MOQC_INSTALLED_PRESET_DIR);
#endif
  return std::nullopt;
}

ExperimentConfig load_preset(const std::string& name) {
  const std::filesystem::path direct(name);
  if (std::filesystem::is_regular_file(direct)) return load_config(direct);
  const auto dir = preset_directory();
  if (!dir) throw ConfigError("preset directory not found (set MOQC_PRESET_DIR)");
  const std::filesystem::path file = *dir / (name + ".yaml");
  if (!std::filesystem::is_regular_file(file)) throw ConfigError("no preset named '" + name + "' in " + dir->string());
  return load_config(file);
}

}  // namespace moqc
