#include "moqc/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moqc/parallel.hpp"

namespace moqc {

double Criterion::value(const FrontPoint& p) const {
  if (secondary < 0) return p.e_j;
  return p.secondaries.at(static_cast<std::size_t>(secondary));
}

std::vector<Criterion> criteria(std::span<const SecondarySpec> specs, std::span<const int> indices) {
  std::vector<Criterion> out{{-1, false}};
  for (int i : indices) out.push_back({i, specs[static_cast<std::size_t>(i)].maximize()});
  return out;
}

bool dominates(const FrontPoint& a, const FrontPoint& b, std::span<const Criterion> crit) {
  bool strict = false;
  for (const auto& c : crit) {
    const double ca = c.cost(a), cb = c.cost(b);
    if (ca > cb) return false;
    if (ca < cb) strict = true;
  }
  return strict;
}

std::vector<FrontPoint> nondominated_filter(std::span<const FrontPoint> points,
                                            std::span<const Criterion> crit) {
  if (crit.empty()) throw std::invalid_argument("nondominated_filter: no criteria");
  const std::size_t n = points.size();
  std::vector<std::vector<double>> cost(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& c : crit) cost[i].push_back(c.cost(points[i]));

  // In lexicographic order a dominator always precedes the point it dominates,
  // so one pass against the kept set suffices.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool drop = false;
    for (std::size_t k : kept) {
      if (cost[k] == cost[i]) {
        drop = true;
        break;
      }
      bool no_worse = true;
      for (std::size_t d = 0; d < crit.size() && no_worse; ++d) no_worse = cost[k][d] <= cost[i][d];
      if (no_worse) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].e_j != points[b].e_j) return points[a].e_j < points[b].e_j;
    return a < b;
  });
  std::vector<FrontPoint> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(points[i]);
  return out;
}

ControlField InitSampler::sample(const SpinSystem& sys, std::uint64_t seed, std::size_t run) const {
  const int modes = n_modes > 0 ? n_modes : sys.max_fourier_mode();
  return sample_random_field(range, sys, modes, derive_seed(seed, run));
}

std::vector<double> EnvelopeGrid::points() const {
  if (!(e_max > 0.0) || !(e_min > 0.0) || e_min > e_max || bins_per_decade < 1) {
    throw std::invalid_argument("EnvelopeGrid: need 0 < e_min <= e_max and bins_per_decade >= 1");
  }
  const double top = std::log10(e_max), bottom = std::log10(e_min);
  std::vector<double> out;
  for (int b = 0;; ++b) {
    const double u = top - double(b) / bins_per_decade;
    if (u < bottom - 1e-9) break;
    out.push_back(std::pow(10.0, u));
  }
  return out;
}

Envelope envelope(std::span<const TrajectoryRecord> runs, std::span<const SecondarySpec> specs,
                  const EnvelopeGrid& grid) {
  Envelope env;
  env.e_j = grid.points();
  const std::size_t nb = env.e_j.size();
  for (const auto& s : specs) {
    env.names.push_back(s.name);
    env.maximize.push_back(s.maximize());
  }
  env.values.assign(specs.size(), std::vector<std::optional<double>>(nb));
  env.contributors.assign(nb, 0);
  env.best_run.assign(nb, -1);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t b = 0; b < nb; ++b) {
      if (!s_at(runs[r], env.e_j[b])) continue;
      ++env.contributors[b];
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const double v = *secondary_at(runs[r], i, env.e_j[b]);
        auto& slot = env.values[i][b];
        const bool better = !slot || (env.maximize[i] ? v > *slot : v < *slot);
        if (better) {
          slot = v;
          if (i == 0) env.best_run[b] = static_cast<int>(r);
        }
      }
    }
  }
  return env;
}

EnsembleResult mc_ensemble(const Objective& obj, const SpinSystem& sys, int n_runs,
                           const InitSampler& init, const FlowConfig& cfg,
                           std::span<const SecondarySpec> secondaries, std::uint64_t seed,
                           int threads, EnvelopeGrid grid) {
  if (n_runs < 1) throw std::invalid_argument("mc_ensemble: n_runs must be >= 1");
  check_dimension(obj, sys);
  cfg.validate();
  EnsembleResult res;
  res.secondaries.assign(secondaries.begin(), secondaries.end());
  res.regime = init.regime;
  res.trajectories.resize(n_runs);
  res.initial_fields.resize(n_runs);
  for (int r = 0; r < n_runs; ++r) res.initial_fields[r] = init.sample(sys, seed, r);
  parallel_for(static_cast<std::size_t>(n_runs), threads, [&](std::size_t r) {
    res.trajectories[r] = flow(obj, sys, res.initial_fields[r], cfg, secondaries);
  });
  for (const auto& t : res.trajectories) res.converged += t.converged ? 1 : 0;
  res.envelope = envelope(res.trajectories, secondaries, grid);
  return res;
}

std::optional<ThresholdPoint> threshold_point(std::span<const double> e_j,
                                              std::span<const std::optional<double>> k) {
  if (e_j.size() != k.size()) throw std::invalid_argument("threshold_point: size mismatch");
  const auto f = [](double e, double kv) { return e + kv; };
  for (std::size_t b = 0; b + 1 < e_j.size(); ++b) {
    if (!k[b] || !k[b + 1]) continue;
    const double fa = f(e_j[b], *k[b]), fb = f(e_j[b + 1], *k[b + 1]);
    if (fa == 0.0) return ThresholdPoint{e_j[b], *k[b]};
    if (!((fa > 0.0) != (fb > 0.0)) && fb != 0.0) continue;
    if (fb == 0.0) return ThresholdPoint{e_j[b + 1], *k[b + 1]};
    // K linear in u = log10 E; bisect 10^u + K(u) on [u_b, u_{b+1}].
    const double ua = std::log10(e_j[b]), ub = std::log10(e_j[b + 1]);
    const double ka = *k[b], kb = *k[b + 1];
    const auto kk = [&](double u) { return ka + (u - ua) / (ub - ua) * (kb - ka); };
    double lo = ua, hi = ub;
    const bool lo_positive = fa > 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = std::pow(10.0, mid) + kk(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == lo_positive) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (std::abs(hi - lo) < 1e-15) break;
    }
    const double u = 0.5 * (lo + hi);
    return ThresholdPoint{std::pow(10.0, u), kk(u)};
  }
  return std::nullopt;
}

std::optional<ThresholdPoint> threshold_point(const Envelope& env, std::size_t secondary) {
  return threshold_point(env.e_j, env.values.at(secondary));
}

int Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

std::size_t Histogram::mode_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * double(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - double(i)) * (sorted[i + 1] - sorted[i]);
}

}  // namespace

Histogram freedman_diaconis(std::vector<double> values) {
  if (values.empty()) throw InsufficientData("histogram: no values");
  Histogram h;
  h.values = values;
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  double width = 2.0 * iqr / std::cbrt(double(values.size()));
  if (hi == lo || !(width > 0.0)) {
    // Degenerate spread: a single bin, or range / sqrt(n) bins when the IQR vanishes.
    if (hi == lo) {
      h.edges = {lo, hi};
      h.counts = {static_cast<int>(values.size())};
      h.bin_width = 0.0;
      return h;
    }
    width = (hi - lo) / std::ceil(std::sqrt(double(values.size())));
  }
  const std::size_t nbins = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil((hi - lo) / width)), 1, 10000);
  width = (hi - lo) / double(nbins);
  h.bin_width = width;
  h.edges.resize(nbins + 1);
  for (std::size_t b = 0; b <= nbins; ++b) h.edges[b] = lo + width * double(b);
  h.edges.back() = hi;
  h.counts.assign(nbins, 0);
  for (double v : values) {
    std::size_t b = static_cast<std::size_t>((v - lo) / width);
    if (b >= nbins) b = nbins - 1;
    ++h.counts[b];
  }
  return h;
}

Histogram distribution_at_fidelity(const EnsembleResult& result, std::size_t secondary, double e_target,
                                   int min_runs) {
  std::vector<double> v;
  for (const auto& t : result.trajectories) {
    if (const auto x = secondary_at(t, secondary, e_target)) v.push_back(*x);
  }
  if (static_cast<int>(v.size()) < min_runs) {
    throw InsufficientData("distribution_at_fidelity: " + std::to_string(v.size()) +
                           " runs reach the target, need " + std::to_string(min_runs));
  }
  return freedman_diaconis(std::move(v));
}

std::vector<FrontPoint> ensemble_points(const EnsembleResult& result, const EnvelopeGrid& grid) {
  const std::vector<double> e = grid.points();
  std::vector<FrontPoint> out;
  for (std::size_t r = 0; r < result.trajectories.size(); ++r) {
    const auto& t = result.trajectories[r];
    for (double eb : e) {
      const auto s = s_at(t, eb);
      if (!s) continue;
      FrontPoint p{eb, {}, static_cast<int>(r), *s};
      for (std::size_t i = 0; i < t.secondary_names.size(); ++i) p.secondaries.push_back(*secondary_at(t, i, eb));
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<FrontPoint> trajectory_points(const EnsembleResult& result) {
  std::vector<FrontPoint> out;
  for (std::size_t r = 0; r < result.trajectories.size(); ++r) {
    for (const auto& smp : result.trajectories[r].samples)
      out.push_back({smp.e_j, smp.secondaries, static_cast<int>(r), smp.s});
  }
  return out;
}

Surface3D surface_from_ensemble(const EnsembleResult& result, int robustness_index, int fluence_index,
                                const EnvelopeGrid& grid) {
  const std::vector<FrontPoint> pts = ensemble_points(result, grid);
  const int idx3[] = {robustness_index, fluence_index};
  Surface3D out;
  out.robustness_index = robustness_index;
  out.fluence_index = fluence_index;
  const auto c3 = criteria(result.secondaries, idx3);
  const auto ck = criteria(result.secondaries, std::span<const int>(idx3, 1));
  const auto cf = criteria(result.secondaries, std::span<const int>(idx3 + 1, 1));
  out.surface = nondominated_filter(pts, c3);
  out.robustness = nondominated_filter(pts, ck);
  out.fluence = nondominated_filter(pts, cf);
  return out;
}

Surface3D surface_3d(const Objective& obj, const SpinSystem& sys, int n_runs, const CorrelationKernel& kernel,
                     std::uint64_t seed, const FlowConfig& cfg, const InitSampler& init, int threads) {
  if (sys.n_spins != 1) throw std::invalid_argument("surface_3d: one-spin system required");
  const std::vector<SecondarySpec> specs{SecondarySpec::robustness("K_eps", {NoiseChannel::Field, kernel}),
                                         SecondarySpec::fluence()};
  EnvelopeGrid grid;
  grid.e_min = cfg.target_error;
  const EnsembleResult res = mc_ensemble(obj, sys, n_runs, init, cfg, specs, seed, threads, grid);
  return surface_from_ensemble(res, 0, 1, grid);
}

}  // namespace moqc
