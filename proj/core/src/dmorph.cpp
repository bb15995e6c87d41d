#include "moqc/dmorph.hpp"

#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

namespace moqc {
namespace odeint = boost::numeric::odeint;

SecondarySpec SecondarySpec::robustness(std::string name, NoiseModel model) {
  SecondarySpec s;
  s.name = std::move(name);
  s.kind = Kind::Robustness;
  s.model = std::move(model);
  return s;
}

SecondarySpec SecondarySpec::fluence(std::string name) {
  SecondarySpec s;
  s.name = std::move(name);
  s.kind = Kind::Fluence;
  return s;
}

std::vector<SecondarySpec> standard_secondaries(const CorrelationKernel& kernel) {
  return {SecondarySpec::robustness("K_eps", {NoiseChannel::Field, kernel}),
          SecondarySpec::robustness("K_omega", {NoiseChannel::Detuning, kernel}),
          SecondarySpec::fluence()};
}

double evaluate_secondary(const SecondarySpec& spec, const Objective& obj, const SpinSystem& sys,
                          const ControlField& field, const PropagatorHistory& hist) {
  if (spec.kind == SecondarySpec::Kind::Fluence) return fluence(field);
  return k_beta_total(obj, sys, hist, spec.model);
}

void FlowConfig::validate() const {
  if (!(target_error > 0.0)) throw std::invalid_argument("FlowConfig: target_error must be > 0");
  if (!std::isfinite(s_max) || !(s_max > 0.0)) throw std::invalid_argument("FlowConfig: s_max must be finite and > 0");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("FlowConfig: tolerances must be > 0");
  if (record_stride < 1) throw std::invalid_argument("FlowConfig: record_stride must be >= 1");
  if (!(initial_step > 0.0)) throw std::invalid_argument("FlowConfig: initial_step must be > 0");
  if (max_steps < 1) throw std::invalid_argument("FlowConfig: max_steps must be >= 1");
}

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::Stalled: return "stalled";
    case FlowStatus::SMaxReached: return "s_max";
    case FlowStatus::StepLimit: return "step_limit";
    case FlowStatus::StepUnderflow: return "step_underflow";
  }
  return "?";
}

namespace {

using State = std::vector<double>;

// Right-hand side of the flow. Remembers J at the last state it saw, which
// after an accepted Dormand-Prince step is the new state (first-same-as-last).
struct GradientField {
  const Objective* obj;
  const SpinSystem* sys;
  State last_x;
  double last_j = 0.0;
  long evaluations = 0;

  void operator()(const State& x, State& dxdt, double /*s*/) {
    dxdt.resize(x.size());
    const ControlField field = ControlField::from_flat(sys->grid, sys->n_spins, x);
    last_j = value_and_gradient(*obj, *sys, field, dxdt);
    last_x = x;
    ++evaluations;
  }

  double value(const State& x) {
    if (x == last_x) return last_j;
    const ControlField field = ControlField::from_flat(sys->grid, sys->n_spins, x);
    return evaluate(*obj, propagate(*sys, field));
  }
};

double norm2(const State& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TrajectorySample make_sample(double s, double j, double grad_norm, const Objective& obj,
                             const SpinSystem& sys, const ControlField& field,
                             std::span<const SecondarySpec> secondaries) {
  TrajectorySample out{s, fidelity_error(j), grad_norm, {}};
  if (!secondaries.empty()) {
    const PropagatorHistory hist = propagate(sys, field);
    out.secondaries.reserve(secondaries.size());
    for (const auto& spec : secondaries)
      out.secondaries.push_back(evaluate_secondary(spec, obj, sys, field, hist));
  }
  return out;
}

double log_e(double e) { return std::log10(std::max(e, 1e-300)); }

// Index of the first sample at or below e_j and the interpolation weight
// toward it from the previous sample.
std::optional<std::pair<std::size_t, double>> locate(const TrajectoryRecord& rec, double e_j) {
  const auto& smp = rec.samples;
  for (std::size_t i = 0; i < smp.size(); ++i) {
    if (smp[i].e_j <= e_j) {
      if (i == 0) {
        if (smp[0].e_j < e_j) return std::nullopt;
        return std::pair<std::size_t, double>{0, 1.0};
      }
      const double a = log_e(smp[i - 1].e_j), b = log_e(smp[i].e_j);
      const double w = b == a ? 1.0 : (log_e(e_j) - a) / (b - a);
      return std::pair<std::size_t, double>{i, w};
    }
  }
  return std::nullopt;
}

}  // namespace

TrajectoryRecord flow(const Objective& obj, const SpinSystem& sys, const ControlField& initial,
                      const FlowConfig& cfg, std::span<const SecondarySpec> secondaries) {
  cfg.validate();
  check_dimension(obj, sys);
  TrajectoryRecord rec;
  for (const auto& s : secondaries) rec.secondary_names.push_back(s.name);

  const ControlField start = initial.to_samples();
  if (!(start.grid() == sys.grid) || start.n_spins() != sys.n_spins) {
    throw GridMismatch("flow: initial field does not match system");
  }
  GradientField rhs{&obj, &sys, {}, 0.0, 0};
  State x = start.flat_samples();
  State dxdt(x.size());
  double s = 0.0;
  rhs(x, dxdt, s);
  double j = rhs.last_j;

  auto record = [&](bool force) {
    const long step = rec.accepted_steps;
    if (!force && step % cfg.record_stride != 0) return;
    const ControlField field = ControlField::from_flat(sys.grid, sys.n_spins, x);
    rec.samples.push_back(make_sample(s, j, norm2(dxdt), obj, sys, field, secondaries));
  };
  double next_milestone = 1e-1;
  auto snapshot = [&] {
    const double e = fidelity_error(j);
    bool first = true;
    while (e <= next_milestone && next_milestone >= cfg.target_error * 0.1) {
      if (first) {
        rec.snapshots.push_back({next_milestone, s, e, ControlField::from_flat(sys.grid, sys.n_spins, x)});
        first = false;
      } else {
        rec.snapshots.push_back({next_milestone, s, e, rec.snapshots.back().field});
      }
      next_milestone *= 0.1;
    }
  };

  record(true);
  snapshot();

  auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<State>());
  double ds = cfg.initial_step;
  bool last_recorded = true;
  rec.status = FlowStatus::StepLimit;
  for (;;) {
    if (fidelity_error(j) <= cfg.target_error) {
      rec.status = FlowStatus::Converged;
      break;
    }
    if (norm2(dxdt) < cfg.stall_threshold) {
      rec.status = FlowStatus::Stalled;
      break;
    }
    if (s >= cfg.s_max) {
      rec.status = FlowStatus::SMaxReached;
      break;
    }
    if (rec.accepted_steps >= cfg.max_steps) {
      rec.status = FlowStatus::StepLimit;
      break;
    }
    ds = std::min(ds, cfg.s_max - s);
    int failures = 0;
    while (stepper.try_step(std::ref(rhs), x, dxdt, s, ds) == odeint::fail) {
      ++rec.rejected_steps;
      if (ds < 1e-14 * std::max(1.0, s) || ++failures > 200) {
        rec.status = FlowStatus::StepUnderflow;
        break;
      }
    }
    if (rec.status == FlowStatus::StepUnderflow) break;
    ++rec.accepted_steps;
    const double j_new = rhs.value(x);
    rec.max_uphill = std::max(rec.max_uphill, j - j_new);
    j = j_new;
    last_recorded = rec.accepted_steps % cfg.record_stride == 0;
    record(false);
    snapshot();
  }
  if (!last_recorded) record(true);
  rec.converged = rec.status == FlowStatus::Converged;
  rec.final_field = ControlField::from_flat(sys.grid, sys.n_spins, x);
  rec.gradient_evaluations = rhs.evaluations;
  return rec;
}

std::vector<std::pair<double, double>> gradient_norm_profile(const TrajectoryRecord& record) {
  if (record.samples.empty()) throw std::invalid_argument("gradient_norm_profile: empty record");
  std::vector<std::pair<double, double>> out;
  out.reserve(record.samples.size());
  for (const auto& smp : record.samples) out.emplace_back(smp.s, smp.grad_norm);
  return out;
}

std::optional<double> secondary_at(const TrajectoryRecord& record, std::size_t index, double e_j) {
  if (index >= record.secondary_names.size()) throw std::out_of_range("secondary_at: bad index");
  const auto hit = locate(record, e_j);
  if (!hit) return std::nullopt;
  const auto [i, w] = *hit;
  const double b = record.samples[i].secondaries[index];
  if (i == 0) return b;
  const double a = record.samples[i - 1].secondaries[index];
  return a + w * (b - a);
}

std::optional<double> s_at(const TrajectoryRecord& record, double e_j) {
  const auto hit = locate(record, e_j);
  if (!hit) return std::nullopt;
  const auto [i, w] = *hit;
  if (i == 0) return record.samples[0].s;
  return record.samples[i - 1].s + w * (record.samples[i].s - record.samples[i - 1].s);
}

}  // namespace moqc
