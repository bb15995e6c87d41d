#include "moqc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kernels.hpp"

namespace moqc {
namespace {

struct HamiltonianParts {
  CMatrix drift;
  std::vector<CMatrix> controls;
};

HamiltonianParts hamiltonian_parts(const SpinSystem& sys) {
  HamiltonianParts p{build_drift(sys), {}};
  for (int i = 0; i < sys.n_spins; ++i) p.controls.push_back(control_operator(sys, i));
  return p;
}

CMatrix assemble(const HamiltonianParts& parts, const ControlField& samples, int m,
                 std::span<const Perturbation> extra) {
  CMatrix h = parts.drift;
  for (std::size_t i = 0; i < parts.controls.size(); ++i)
    h += samples.step_value(static_cast<int>(i), m) * parts.controls[i];
  for (const auto& p : extra) h += p.values[m - 1] * p.op;
  return h;
}

void check_field(const SpinSystem& sys, const ControlField& field) {
  if (!(field.grid() == sys.grid)) throw GridMismatch("control field grid does not match system grid");
  if (field.n_spins() != sys.n_spins) {
    throw GridMismatch("control field spin count does not match system");
  }
}

}  // namespace

CMatrix step_hamiltonian(const SpinSystem& sys, const ControlField& samples, int m,
                         std::span<const Perturbation> extra) {
  return assemble(hamiltonian_parts(sys), samples, m, extra);
}

namespace {

template <int D>
void fill_history(const HamiltonianParts& parts, const ControlField& samples,
                  std::span<const Perturbation> extra, PropagatorHistory& hist) {
  const int n = hist.grid.n_steps;
  detail::StepSpectrum<D> spec;
  detail::Mat<D> cum = detail::Mat<D>::Identity();
  hist.cumulative.push_back(cum);
  for (int m = 1; m <= n; ++m) {
    hist.eigs.push_back(eig_hermitian(assemble(parts, samples, m, extra)));
    spec.build(hist.eigs.back(), hist.grid.dt);
    const detail::Mat<D> step = spec.unitary();
    cum = step * cum;
    hist.steps.push_back(step);
    hist.cumulative.push_back(cum);
  }
}

template <int D>
Generators generators_impl(const PropagatorHistory& hist, const CMatrix& op, bool with_second) {
  const int n = hist.grid.n_steps;
  const detail::Mat<D> b = op;
  Generators g;
  g.first.reserve(n);
  if (with_second) g.second.reserve(n);
  detail::StepSpectrum<D> spec;
  detail::Mat<D> f1, f2;
  detail::Mat<D> prev = hist.cumulative[0];
  for (int m = 1; m <= n; ++m) {
    const detail::Mat<D> cur = hist.cumulative[m];
    spec.build(hist.eigs[m - 1], hist.grid.dt);
    if (with_second) {
      spec.frechet12(b, f1, f2);
      g.second.push_back(cur.adjoint() * f2 * prev);
    } else {
      f1 = spec.frechet(b);
    }
    g.first.push_back(cur.adjoint() * f1 * prev);
    prev = cur;
  }
  return g;
}

}  // namespace

PropagatorHistory propagate(const SpinSystem& sys, const ControlField& field,
                            std::span<const Perturbation> extra) {
  check_field(sys, field);
  const ControlField samples = field.to_samples();
  const int n = sys.grid.n_steps;
  for (const auto& p : extra) {
    if (p.values.size() != static_cast<std::size_t>(n)) {
      throw GridMismatch("perturbation length does not match grid");
    }
  }
  const HamiltonianParts parts = hamiltonian_parts(sys);
  PropagatorHistory hist;
  hist.grid = sys.grid;
  hist.eigs.reserve(n);
  hist.steps.reserve(n);
  hist.cumulative.reserve(n + 1);
  if (sys.dim() == 2) {
    fill_history<2>(parts, samples, extra, hist);
  } else {
    fill_history<4>(parts, samples, extra, hist);
  }
  return hist;
}

Generators interaction_generators(const PropagatorHistory& hist, const CMatrix& op,
                                  bool with_second) {
  check_matrix(op);
  if (op.rows() != hist.dim()) throw DimensionMismatch("interaction_generators: operator dimension");
  return hist.dim() == 2 ? generators_impl<2>(hist, op, with_second)
                         : generators_impl<4>(hist, op, with_second);
}

Objective Objective::state_transfer(const SpinSystem& sys, int from_level, int to_level) {
  const int d = sys.dim();
  if (from_level < 1 || from_level > d || to_level < 1 || to_level > d) {
    throw std::out_of_range("state_transfer: level out of range");
  }
  const HermitianEig eig = eig_hermitian(build_drift(sys));
  // eig is ascending; level 1 is the highest energy.
  CVector from = eig.vectors.col(d - from_level);
  CVector to = eig.vectors.col(d - to_level);
  return state_transfer(from, to,
                        "P_" + std::to_string(from_level) + "->" + std::to_string(to_level));
}

Objective Objective::state_transfer(CVector initial, CVector target, std::string name) {
  if (initial.size() != target.size() || (initial.size() != 2 && initial.size() != 4)) {
    throw DimensionMismatch("state_transfer: states must both have dimension 2 or 4");
  }
  Objective o;
  o.kind_ = ObjectiveKind::StateTransfer;
  o.dim_ = static_cast<int>(initial.size());
  o.name_ = std::move(name);
  o.psi_ = initial.normalized();
  const CVector f = target.normalized();
  o.q_ = f * f.adjoint();
  return o;
}

Objective Objective::observable(CMatrix op, CVector initial, std::string name) {
  check_matrix(op);
  if (op.rows() != initial.size()) throw DimensionMismatch("observable: state/operator mismatch");
  Objective o;
  o.kind_ = ObjectiveKind::Observable;
  o.dim_ = static_cast<int>(op.rows());
  o.name_ = std::move(name);
  o.psi_ = initial.normalized();
  o.q_ = 0.5 * (op + op.adjoint());
  o.offset_ = 0.5;
  o.scale_ = 0.5;
  return o;
}

Objective Objective::sigma_x(const SpinSystem& sys) {
  const int d = sys.dim();
  CVector ground = CVector::Zero(d);
  ground(0) = 1.0;
  return observable(control_operator(sys, 0), ground, sys.n_spins == 1 ? "<sx>" : "<sx1>");
}

Objective Objective::gate(CMatrix target, std::string name, GatePhase phase) {
  check_matrix(target);
  if (unitarity_error(target) > 1e-10) throw InvalidMatrix("gate: target is not unitary");
  const int n = static_cast<int>(target.rows());
  if (phase == GatePhase::SpecialUnitary) {
    const cplx d = n == 2 ? Eigen::Matrix2cd(target).determinant()
                          : Eigen::Matrix4cd(target).determinant();
    target *= std::exp(-cplx(0.0, std::arg(d) / n));
  }
  Objective o;
  o.kind_ = ObjectiveKind::GateFidelity;
  o.dim_ = n;
  o.name_ = std::move(name);
  o.gate_target_ = target;
  o.m_ = target.adjoint() / (2.0 * n);
  return o;
}

Objective Objective::hadamard(GatePhase phase) {
  CMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return gate(h / std::numbers::sqrt2, "F_H", phase);
}

Objective Objective::cnot(GatePhase phase) {
  CMatrix c = CMatrix::Zero(4, 4);
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  c(2, 3) = 1.0;
  c(3, 2) = 1.0;
  return gate(c, "F_CNOT", phase);
}

double Objective::value(const CMatrix& u) const {
  if (kind_ == ObjectiveKind::GateFidelity) return 0.5 + (m_ * u).trace().real();
  const CVector phi = u * psi_;
  return offset_ + scale_ * phi.dot(q_ * phi).real();
}

namespace {

template <int D>
void gate_gradient(const CMatrix& m, const CMatrix& u, std::span<const CMatrix> first,
                   std::span<double> out) {
  const detail::Mat<D> a = detail::Mat<D>(m) * detail::Mat<D>(u);
  for (std::size_t j = 0; j < first.size(); ++j) {
    out[j] = (a * detail::Mat<D>(first[j])).trace().real();
  }
}

template <int D>
void quadratic_gradient(const CVector& psi_dyn, const CMatrix& q, double scale, const CMatrix& u_dyn,
                        std::span<const CMatrix> first, std::span<double> out) {
  const detail::Mat<D> u = u_dyn;
  const detail::Vec<D> psi = psi_dyn;
  const detail::Vec<D> r_adj = u.adjoint() * (detail::Mat<D>(q) * (u * psi));
  for (std::size_t j = 0; j < first.size(); ++j) {
    out[j] = 2.0 * scale * r_adj.dot(detail::Mat<D>(first[j]) * psi).real();
  }
}

template <int D>
Eigen::MatrixXd gate_hessian(const CMatrix& m, const CMatrix& u, const Generators& gens) {
  const auto n = static_cast<Eigen::Index>(gens.first.size());
  const detail::Mat<D> a = detail::Mat<D>(m) * detail::Mat<D>(u);
  // Re Tr(A G_k G_j) = Re sum_ab (G_j A)(a,b) G_k(b,a) for j < k
  std::vector<detail::Mat<D>> left(n), right_t(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    left[j] = detail::Mat<D>(gens.first[j]) * a;
    right_t[j] = detail::Mat<D>(gens.first[j]).transpose();
  }
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    h(j, j) = (a * detail::Mat<D>(gens.second[j])).trace().real();
    const cplx* lj = left[j].data();
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const cplx* gk = right_t[k].data();
      double v = 0.0;
      for (int e = 0; e < D * D; ++e) v += lj[e].real() * gk[e].real() - lj[e].imag() * gk[e].imag();
      h(j, k) = v;
      h(k, j) = v;
    }
  }
  return h;
}

template <int D>
Eigen::MatrixXd quadratic_hessian(const CVector& psi_dyn, const CMatrix& q_dyn, double scale,
                                  const CMatrix& u_dyn, const Generators& gens) {
  const auto n = static_cast<Eigen::Index>(gens.first.size());
  const detail::Mat<D> u = u_dyn;
  const detail::Mat<D> q = q_dyn;
  const detail::Vec<D> psi = psi_dyn;
  const detail::Vec<D> r_adj = u.adjoint() * (q * (u * psi));
  const detail::Mat<D> q_tilde = u.adjoint() * q * u;
  // w_j = G_j psi, x_j = (r G_j)^dagger, y_j = Q~ w_j
  std::vector<detail::Vec<D>> w(n), x_adj(n), y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const detail::Mat<D> g = gens.first[j];
    w[j] = g * psi;
    x_adj[j] = g.adjoint() * r_adj;
    y[j] = q_tilde * w[j];
  }
  const double c = 2.0 * scale;
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    h(j, j) = c * (r_adj.dot(detail::Mat<D>(gens.second[j]) * psi).real() + w[j].dot(y[j]).real());
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double v = c * (x_adj[k].dot(w[j]).real() + w[j].dot(y[k]).real());
      h(j, k) = v;
      h(k, j) = v;
    }
  }
  return h;
}

// Sum over j < k of rho^(k-j) Re Tr(L_j G_k) via S_k = rho (S_{k-1} + L_{k-1}).
template <int D>
double gate_geometric(const CMatrix& m, const CMatrix& u, const Generators& gens, double rho) {
  const std::size_t n = gens.first.size();
  const detail::Mat<D> a = detail::Mat<D>(m) * detail::Mat<D>(u);
  detail::Mat<D> acc = detail::Mat<D>::Zero();
  double diag = 0.0, off = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const detail::Mat<D> g = gens.first[k];
    if (k > 0) off += (acc * g).trace().real();
    diag += (a * detail::Mat<D>(gens.second[k])).trace().real();
    acc = rho * (acc + g * a);
  }
  return diag + 2.0 * off;
}

template <int D>
double quadratic_geometric(const CVector& psi_dyn, const CMatrix& q_dyn, double scale,
                           const CMatrix& u_dyn, const Generators& gens, double rho) {
  const std::size_t n = gens.first.size();
  const detail::Mat<D> u = u_dyn;
  const detail::Mat<D> q = q_dyn;
  const detail::Vec<D> psi = psi_dyn;
  const detail::Vec<D> r_adj = u.adjoint() * (q * (u * psi));
  const detail::Mat<D> q_tilde = u.adjoint() * q * u;
  detail::Vec<D> acc = detail::Vec<D>::Zero();
  double diag = 0.0, off = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const detail::Mat<D> g = gens.first[k];
    const detail::Vec<D> w = g * psi;
    const detail::Vec<D> x_adj = g.adjoint() * r_adj;
    const detail::Vec<D> y = q_tilde * w;
    if (k > 0) off += x_adj.dot(acc).real() + acc.dot(y).real();
    diag += r_adj.dot(detail::Mat<D>(gens.second[k]) * psi).real() + w.dot(y).real();
    acc = rho * (acc + w);
  }
  return 2.0 * scale * (diag + 2.0 * off);
}

}  // namespace

double Objective::geometric_contraction(const CMatrix& u, const Generators& gens, double rho) const {
  if (gens.second.size() != gens.first.size()) {
    throw std::invalid_argument("geometric_contraction: second-order generators required");
  }
  if (u.rows() != dim_) throw DimensionMismatch("geometric_contraction: unitary dimension");
  if (kind_ == ObjectiveKind::GateFidelity) {
    return dim_ == 2 ? gate_geometric<2>(m_, u, gens, rho) : gate_geometric<4>(m_, u, gens, rho);
  }
  return dim_ == 2 ? quadratic_geometric<2>(psi_, q_, scale_, u, gens, rho)
                   : quadratic_geometric<4>(psi_, q_, scale_, u, gens, rho);
}

void Objective::gradient(const CMatrix& u, std::span<const CMatrix> first,
                         std::span<double> out) const {
  if (u.rows() != dim_) throw DimensionMismatch("gradient: unitary dimension");
  if (kind_ == ObjectiveKind::GateFidelity) {
    dim_ == 2 ? gate_gradient<2>(m_, u, first, out) : gate_gradient<4>(m_, u, first, out);
  } else {
    dim_ == 2 ? quadratic_gradient<2>(psi_, q_, scale_, u, first, out)
              : quadratic_gradient<4>(psi_, q_, scale_, u, first, out);
  }
}

Eigen::MatrixXd Objective::hessian(const CMatrix& u, const Generators& gens) const {
  if (gens.second.size() != gens.first.size()) {
    throw std::invalid_argument("hessian: second-order generators required");
  }
  if (u.rows() != dim_) throw DimensionMismatch("hessian: unitary dimension");
  if (kind_ == ObjectiveKind::GateFidelity) {
    return dim_ == 2 ? gate_hessian<2>(m_, u, gens) : gate_hessian<4>(m_, u, gens);
  }
  return dim_ == 2 ? quadratic_hessian<2>(psi_, q_, scale_, u, gens)
                   : quadratic_hessian<4>(psi_, q_, scale_, u, gens);
}

void check_dimension(const Objective& obj, const SpinSystem& sys) {
  if (obj.dim() != sys.dim()) {
    throw DimensionMismatch("objective " + obj.name() + " has dimension " +
                            std::to_string(obj.dim()) + " but system has dimension " +
                            std::to_string(sys.dim()));
  }
}

double evaluate(const Objective& obj, const PropagatorHistory& hist) {
  if (obj.dim() != hist.dim()) throw DimensionMismatch("evaluate: objective/system dimension mismatch");
  return obj.value(hist.final_unitary());
}

double fidelity_error(double j) { return std::max(0.0, 1.0 - j); }

double value_and_gradient(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                          std::span<double> out) {
  check_dimension(obj, sys);
  const int n = sys.grid.n_steps;
  if (out.size() != static_cast<std::size_t>(n) * sys.n_spins) {
    throw GridMismatch("gradient: output buffer has wrong length");
  }
  const PropagatorHistory hist = propagate(sys, field);
  const CMatrix& u = hist.final_unitary();
  for (int s = 0; s < sys.n_spins; ++s) {
    const Generators g = interaction_generators(hist, control_operator(sys, s), false);
    obj.gradient(u, g.first, out.subspan(static_cast<std::size_t>(s) * n, n));
  }
  return obj.value(u);
}

std::vector<double> gradient(const Objective& obj, const SpinSystem& sys, const ControlField& field) {
  std::vector<double> out(static_cast<std::size_t>(sys.grid.n_steps) * sys.n_spins);
  value_and_gradient(obj, sys, field, out);
  return out;
}

}  // namespace moqc
