#pragma once

// Piecewise-constant propagation and the three primary objectives:
// state transfer |<f|U(T)|i>|^2, a rescaled observable Tr[rho(T) O], and the
// gate fidelity 1 - |U(T) - W|_F^2 / (4N).
//
// Derivatives are expressed through interaction-picture generators. For a
// parameter beta_m entering step m as H_m + beta_m B,
//
//   dU(T)/d beta_m              = U(T) G_m,       G_m = P_m^+ F_m P_{m-1}
//   d^2U(T)/d beta_j d beta_k   = U(T) G_k G_j    (j < k)
//   d^2U(T)/d beta_m^2          = U(T) S_m,       S_m = P_m^+ F2_m P_{m-1}
//
// with P_m = U(t_m, 0) and F_m, F2_m the first and second Frechet derivatives
// of the step exponential along B.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "moqc/linalg.hpp"
#include "moqc/spin_system.hpp"

namespace moqc {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PropagatorHistory {
  TimeGrid grid;
  std::vector<HermitianEig> eigs;   // spectrum of H_m, index m - 1
  std::vector<CMatrix> steps;       // exp(-i H_m dt), index m - 1
  std::vector<CMatrix> cumulative;  // U(t_m, 0), index m = 0..n

  const CMatrix& final_unitary() const { return cumulative.back(); }
  int dim() const { return static_cast<int>(cumulative.front().rows()); }
};

/// Additive stochastic term delta_beta_m * op on every step.
struct Perturbation {
  CMatrix op;
  std::span<const double> values;  // length n_steps
};

/// H_m for step m (1-based) including any perturbations.
CMatrix step_hamiltonian(const SpinSystem& sys, const ControlField& samples, int m,
                         std::span<const Perturbation> extra = {});

PropagatorHistory propagate(const SpinSystem& sys, const ControlField& field,
                            std::span<const Perturbation> extra = {});

struct Generators {
  std::vector<CMatrix> first;
  std::vector<CMatrix> second;  // empty unless requested
};

Generators interaction_generators(const PropagatorHistory& hist, const CMatrix& op,
                                  bool with_second);

enum class ObjectiveKind { StateTransfer, Observable, GateFidelity };

/// Global-phase handling for gate targets. The spin Hamiltonian is traceless,
/// so U(T) lies in SU(N); SpecialUnitary rescales W by det(W)^(-1/N) so the
/// target is reachable. AsGiven keeps W literally.
enum class GatePhase { SpecialUnitary, AsGiven };

class Objective {
 public:
  /// Transfer between drift eigenstates, levels numbered 1..N in descending energy.
  static Objective state_transfer(const SpinSystem& sys, int from_level, int to_level);
  static Objective state_transfer(CVector initial, CVector target, std::string name);
  /// (<O> + 1) / 2 for a pure initial state; O must have spectrum in [-1, 1].
  static Objective observable(CMatrix op, CVector initial, std::string name);
  /// <sigma_x^(1)> from |0...0>.
  static Objective sigma_x(const SpinSystem& sys);
  static Objective gate(CMatrix target, std::string name, GatePhase phase = GatePhase::SpecialUnitary);
  static Objective hadamard(GatePhase phase = GatePhase::SpecialUnitary);
  static Objective cnot(GatePhase phase = GatePhase::SpecialUnitary);

  ObjectiveKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const CMatrix& gate_target() const { return gate_target_; }

  double value(const CMatrix& u) const;
  /// out[m] = dJ/d beta_m given first-order generators.
  void gradient(const CMatrix& u, std::span<const CMatrix> first, std::span<double> out) const;
  /// Per-sample Hessian d^2 J / d beta_j d beta_k.
  Eigen::MatrixXd hessian(const CMatrix& u, const Generators& gens) const;
  /// sum_jk H_jk rho^|j-k| without forming H (O(n) recursion).
  double geometric_contraction(const CMatrix& u, const Generators& gens, double rho) const;

 private:
  ObjectiveKind kind_ = ObjectiveKind::StateTransfer;
  int dim_ = 2;
  std::string name_;
  // Quadratic kinds: J = offset + scale * <psi| U^+ Q U |psi>.
  CVector psi_;
  CMatrix q_;
  double offset_ = 0.0;
  double scale_ = 1.0;
  // Gate kind: J = 1/2 + Re Tr(M U), M = W^+ / (2N).
  CMatrix gate_target_;
  CMatrix m_;
};

void check_dimension(const Objective& obj, const SpinSystem& sys);

double evaluate(const Objective& obj, const PropagatorHistory& hist);
/// 1 - J, clamped at zero.
double fidelity_error(double j);

/// dJ/d eps_m for every spin, layout spin * n_steps + (m - 1).
std::vector<double> gradient(const Objective& obj, const SpinSystem& sys, const ControlField& field);
/// Also returns J; `out` must have n_spins * n_steps entries.
double value_and_gradient(const Objective& obj, const SpinSystem& sys, const ControlField& field,
                          std::span<double> out);

}  // namespace moqc
