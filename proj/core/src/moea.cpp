#include "moqc/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "moqc/parallel.hpp"

namespace moqc {

double hypervolume_2d(std::span<const Point2> front, Point2 reference) {
  for (const auto& p : front) {
    if (!(p.first <= reference.first) || !(p.second <= reference.second)) {
      throw OutsideReference("hypervolume_2d: point outside the reference box");
    }
  }
  std::vector<Point2> pts(front.begin(), front.end());
  std::sort(pts.begin(), pts.end());
  double area = 0.0, best = reference.second;
  for (const auto& p : pts) {
    if (p.second < best) {
      area += (reference.first - p.first) * (best - p.second);
      best = p.second;
    }
  }
  return area;
}

std::vector<double> hypervolume_contributions(std::span<const Point2> points, Point2 reference) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  // Staircase of distinct nondominated values, each with its multiplicity.
  struct Step {
    Point2 value;
    std::vector<std::size_t> members;
  };
  std::vector<Step> stair;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    const Point2& p = points[i];
    if (!stair.empty() && stair.back().value == p) {
      stair.back().members.push_back(i);
    } else if (p.second < best) {
      stair.push_back({p, {i}});
      best = p.second;
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < stair.size(); ++s) {
    if (stair[s].members.size() > 1) continue;
    const double right = s + 1 < stair.size() ? stair[s + 1].value.first : reference.first;
    const double top = s > 0 ? stair[s - 1].value.second : reference.second;
    out[stair[s].members[0]] =
        std::max(0.0, right - stair[s].value.first) * std::max(0.0, top - stair[s].value.second);
  }
  return out;
}

std::vector<int> nondominated_ranks(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<int> rank(n, 0);
  std::vector<double> front_min;  // smallest f2 seen in each front
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t i = order[idx];
    if (idx > 0 && points[order[idx - 1]] == points[i]) {
      rank[i] = rank[order[idx - 1]];
      continue;
    }
    // Every earlier point has f1 <= p.f1, so a front dominates p iff its
    // smallest f2 is <= p.f2. Those minima increase with rank.
    const auto it = std::upper_bound(front_min.begin(), front_min.end(), points[i].second);
    const int r = static_cast<int>(it - front_min.begin());
    if (it == front_min.end()) {
      front_min.push_back(points[i].second);
    } else {
      *it = points[i].second;
    }
    rank[i] = r;
  }
  return rank;
}

void MoeaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("MoeaConfig: population must be >= 2");
  if (generations < 0) throw std::invalid_argument("MoeaConfig: generations must be >= 0");
  if (!(initial_step >= 0.0) || !std::isfinite(initial_step)) {
    throw std::invalid_argument("MoeaConfig: initial_step must be finite and >= 0");
  }
  if (history_stride < 1) throw std::invalid_argument("MoeaConfig: history_stride must be >= 1");
}

ControlField genome_field(const SpinSystem& sys, std::span<const double> genome, int n_modes) {
  if (genome.size() != static_cast<std::size_t>(2 * n_modes * sys.n_spins)) {
    throw std::invalid_argument("genome_field: genome length does not match modes and spins");
  }
  std::vector<std::vector<FourierMode>> modes(sys.n_spins);
  std::size_t g = 0;
  for (auto& spin_modes : modes) {
    for (int k = 1; k <= n_modes; ++k) {
      spin_modes.push_back({k, genome[g], genome[g + 1]});
      g += 2;
    }
  }
  return ControlField::from_fourier(sys.grid, std::move(modes));
}

Eigen::VectorXd field_genome(const ControlField& field) {
  const auto& modes = field.modes();
  std::vector<double> g;
  for (const auto& spin_modes : modes)
    for (const auto& m : spin_modes) {
      g.push_back(m.amplitude);
      g.push_back(m.phase);
    }
  return Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

Point2 moea_fitness(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const ControlField& field) {
  const PropagatorHistory hist = propagate(sys, field);
  const double j = evaluate(obj, hist);
  return {fidelity_error(j), -k_beta_total(obj, sys, hist, noise)};
}

Point2 moea_reference(double max_f2) {
  return {1.0, max_f2 + 0.1 * std::abs(max_f2) + 1e-12};
}

namespace {

constexpr double kSuccessThreshold = 0.44;

struct Strategy {
  int n = 0;
  double p_target = 0.0, c_p = 0.0, damping = 0.0, c_c = 0.0, c_cov = 0.0;

  explicit Strategy(int dim) : n(dim) {
    p_target = 1.0 / (5.0 + std::sqrt(0.5));
    c_p = p_target / (2.0 + p_target);
    damping = 1.0 + n / 2.0;
    c_c = 2.0 / (n + 2.0);
    c_cov = 2.0 / (double(n) * n + 6.0);
  }

  void update_step(Individual& ind, bool success) const {
    ind.success_rate = (1.0 - c_p) * ind.success_rate + c_p * (success ? 1.0 : 0.0);
    ind.step_size *= std::exp((ind.success_rate - p_target) / (damping * (1.0 - p_target)));
  }

  void update_covariance(Individual& ind, const Eigen::VectorXd& normalized_step) const {
    if (ind.success_rate < kSuccessThreshold) {
      ind.evolution_path = (1.0 - c_c) * ind.evolution_path + std::sqrt(c_c * (2.0 - c_c)) * normalized_step;
      ind.covariance = (1.0 - c_cov) * ind.covariance +
                       c_cov * ind.evolution_path * ind.evolution_path.transpose();
    } else {
      ind.evolution_path = (1.0 - c_c) * ind.evolution_path;
      ind.covariance = (1.0 - c_cov) * ind.covariance +
                       c_cov * (ind.evolution_path * ind.evolution_path.transpose() +
                                c_c * (2.0 - c_c) * ind.covariance);
    }
  }
};

// Amplitudes reflect at zero, phases wrap into [0, 2 pi).
void repair(Eigen::VectorXd& g) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < g.size(); i += 2) {
    g(i) = std::abs(g(i));
    double ph = std::fmod(g(i + 1), two_pi);
    if (ph < 0.0) ph += two_pi;
    if (ph >= two_pi) ph = 0.0;
    g(i + 1) = ph;
  }
}

// Index of the member to drop from a mu + 1 population.
std::size_t select_removal(const std::vector<Individual>& pop, Point2 reference) {
  std::vector<Point2> fit;
  fit.reserve(pop.size());
  for (const auto& ind : pop) fit.push_back(ind.fitness);
  const std::vector<int> rank = nondominated_ranks(fit);
  const int worst = *std::max_element(rank.begin(), rank.end());
  std::vector<std::size_t> members;
  std::vector<Point2> last;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (rank[i] == worst) {
      members.push_back(i);
      last.push_back(fit[i]);
    }
  }
  if (members.size() == 1) return members[0];
  const std::vector<double> c = hypervolume_contributions(last, reference);
  std::size_t pick = 0;
  for (std::size_t m = 1; m < members.size(); ++m)
    if (c[m] <= c[pick]) pick = m;  // ties drop the newest
  return members[pick];
}

std::vector<Point2> front_of(const std::vector<Individual>& pop) {
  std::vector<Point2> fit;
  for (const auto& ind : pop) fit.push_back(ind.fitness);
  const std::vector<int> rank = nondominated_ranks(fit);
  std::vector<Point2> out;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (rank[i] == 0) out.push_back(fit[i]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

MoeaResult moea_run(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const MoeaConfig& cfg) {
  cfg.validate();
  const int n_modes = cfg.init.n_modes > 0 ? cfg.init.n_modes : sys.max_fourier_mode();
  std::vector<Individual> start(cfg.population);
  for (int i = 0; i < cfg.population; ++i) {
    start[i].genome = field_genome(sample_random_field(cfg.init.range, sys, n_modes, derive_seed(cfg.seed, i)));
    start[i].step_size = cfg.initial_step;
  }
  return moea_run(obj, sys, noise, cfg, std::move(start));
}

MoeaResult moea_run(const Objective& obj, const SpinSystem& sys, const NoiseModel& noise,
                    const MoeaConfig& cfg, std::vector<Individual> pop) {
  cfg.validate();
  check_dimension(obj, sys);
  if (pop.size() < 2) throw std::invalid_argument("moea_run: population must be >= 2");
  const Eigen::Index dim = pop.front().genome.size();
  if (dim == 0 || dim % (2 * sys.n_spins) != 0) throw std::invalid_argument("moea_run: bad genome length");
  const int n_modes = static_cast<int>(dim / (2 * sys.n_spins));
  if (n_modes > sys.max_fourier_mode()) throw std::invalid_argument("moea_run: mode count exceeds frequency cap");
  const Strategy strategy(static_cast<int>(dim));

  // Mutation acts on genome / scale so amplitudes and phases move comparably.
  Eigen::VectorXd scale(dim);
  for (Eigen::Index i = 0; i < dim; i += 2) {
    scale(i) = std::max(1.0, cfg.init.range.hi);
    scale(i + 1) = std::numbers::pi;
  }

  MoeaResult res;
  res.n_modes = n_modes;
  long next_id = 0;
  for (auto& ind : pop) {
    if (ind.genome.size() != dim) throw std::invalid_argument("moea_run: genome lengths differ");
    repair(ind.genome);
    ind.id = next_id++;
    ind.success_rate = strategy.p_target;
    if (cfg.full_covariance) {
      ind.covariance = Eigen::MatrixXd::Identity(dim, dim);
      ind.evolution_path = Eigen::VectorXd::Zero(dim);
    }
  }

  auto evaluate_all = [&](std::vector<Individual>& group) {
    parallel_for(group.size(), cfg.threads, [&](std::size_t i) {
      const Eigen::VectorXd& g = group[i].genome;
      group[i].fitness = moea_fitness(obj, sys, noise, genome_field(sys, {g.data(), std::size_t(g.size())}, n_modes));
    });
    res.evaluations += static_cast<long>(group.size());
  };
  evaluate_all(pop);
  double max_f2 = -std::numeric_limits<double>::infinity();
  for (const auto& ind : pop) max_f2 = std::max(max_f2, ind.fitness.second);

  auto snapshot = [&](int generation) {
    MoeaGeneration h;
    h.generation = generation;
    h.reference = moea_reference(max_f2);
    h.front = front_of(pop);
    h.hypervolume = hypervolume_2d(h.front, h.reference);
    res.history.push_back(std::move(h));
  };
  snapshot(0);

  Rng rng = make_rng(cfg.seed, 0x6d6f6561ULL);
  std::normal_distribution<double> normal;
  const std::size_t mu = pop.size();
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> children(mu);
    std::vector<long> parent_id(mu);
    std::vector<Eigen::VectorXd> steps(mu);
    for (std::size_t i = 0; i < mu; ++i) {
      const Individual& p = pop[i];
      Eigen::VectorXd z(dim);
      for (Eigen::Index d = 0; d < dim; ++d) z(d) = normal(rng);
      if (cfg.full_covariance) {
        const Eigen::LLT<Eigen::MatrixXd> llt(p.covariance);
        z = llt.matrixL() * z;
      }
      steps[i] = z;
      children[i] = p;
      children[i].genome = p.genome + p.step_size * scale.cwiseProduct(z);
      repair(children[i].genome);
      children[i].id = next_id++;
      parent_id[i] = p.id;
    }
    evaluate_all(children);
    for (const auto& c : children) max_f2 = std::max(max_f2, c.fitness.second);
    const Point2 reference = moea_reference(max_f2);

    for (std::size_t i = 0; i < mu; ++i) {
      pop.push_back(children[i]);
      const std::size_t drop = select_removal(pop, reference);
      const bool success = drop != pop.size() - 1;
      pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto parent = std::find_if(pop.begin(), pop.end(), [&](const Individual& x) { return x.id == parent_id[i]; });
      if (parent != pop.end()) strategy.update_step(*parent, success);
      if (success) {
        Individual& child = pop.back().id == children[i].id
                                ? pop.back()
                                : *std::find_if(pop.begin(), pop.end(), [&](const Individual& x) { return x.id == children[i].id; });
        strategy.update_step(child, true);
        if (cfg.full_covariance) strategy.update_covariance(child, steps[i]);
      }
    }
    if (gen % cfg.history_stride == 0 || gen == cfg.generations) snapshot(gen);
  }

  std::vector<FrontPoint> pts;
  for (std::size_t i = 0; i < pop.size(); ++i)
    pts.push_back({pop[i].fitness.first, {-pop[i].fitness.second}, static_cast<int>(i), 0.0});
  const Criterion crit[] = {{-1, false}, {0, true}};
  res.front = nondominated_filter(pts, crit);
  res.population = std::move(pop);
  return res;
}

}  // namespace moqc
