#include "moqc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moqc {
namespace {

constexpr double kDegenerate = 1e-9;
// Below this argument magnitude the phi functions switch to their series.
constexpr double kSeriesRadius = 0.1;
constexpr cplx kI{0.0, 1.0};

// (e^z - 1) / z
cplx phi1(cplx z) {
  if (std::abs(z) < kSeriesRadius) {
    cplx term = 1.0, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      term = (k == 0) ? cplx(1.0) : term * z / double(k + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// Second divided difference of e^y at (u, 0, v).
cplx exp_dd_u0v(cplx u, cplx v) {
  if (std::abs(u - v) >= kSeriesRadius) return (phi1(u) - phi1(v)) / (u - v);
  // sum_{k>=1} h_{k-1}(u, v) / (k+1)!, h_m(u, v) = u^m + v h_{m-1}
  cplx h = 1.0, upow = 1.0, sum = 0.0;
  double fact = 2.0;
  for (int k = 1; k <= 14; ++k) {
    if (k > 1) {
      upow *= u;
      h = upow + v * h;
      fact *= double(k + 1);
    }
    sum += h / fact;
  }
  return sum;
}

HermitianEig eig2(const CMatrix& h) {
  const double p = h(0, 0).real();
  const double r = h(1, 1).real();
  const cplx q = h(0, 1);
  const double mean = 0.5 * (p + r);
  const double delta = 0.5 * (p - r);
  const double e = std::hypot(delta, std::abs(q));

  HermitianEig out;
  out.values.resize(2);
  out.vectors.resize(2, 2);
  out.values << mean - e, mean + e;
  if (std::abs(q) == 0.0) {
    if (p <= r) {
      out.vectors << 1.0, 0.0, 0.0, 1.0;
    } else {
      out.vectors << 0.0, 1.0, 1.0, 0.0;
    }
    return out;
  }
  // Upper eigenvector, picking the row of (H - lambda) without cancellation.
  cplx a, b;
  if (delta >= 0.0) {
    a = e + delta;
    b = std::conj(q);
  } else {
    a = q;
    b = e - delta;
  }
  const double norm = std::sqrt(std::norm(a) + std::norm(b));
  a /= norm;
  b /= norm;
  out.vectors(0, 1) = a;
  out.vectors(1, 1) = b;
  out.vectors(0, 0) = -std::conj(b);
  out.vectors(1, 0) = std::conj(a);
  return out;
}

HermitianEig eig4(const CMatrix& h) {
  Eigen::Matrix4cd full = h;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(full);
  if (solver.info() != Eigen::Success) throw InvalidMatrix("eig_hermitian: solver did not converge");
  HermitianEig out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

CMatrix to_eigenbasis(const HermitianEig& eig, const CMatrix& m) {
  return eig.vectors.adjoint() * m * eig.vectors;
}

CMatrix from_eigenbasis(const HermitianEig& eig, const CMatrix& m) {
  return eig.vectors * m * eig.vectors.adjoint();
}

}  // namespace

void check_matrix(const CMatrix& m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw InvalidMatrix("matrix must be 2x2 or 4x4, got " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
  }
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InvalidMatrix("matrix has non-finite entries");
    }
  }
}

HermitianEig eig_hermitian(const CMatrix& h) {
  check_matrix(h);
  const CMatrix sym = 0.5 * (h + h.adjoint());
  return sym.rows() == 2 ? eig2(sym) : eig4(sym);
}

CMatrix expm_unitary(const HermitianEig& eig, double dt) {
  const Eigen::Index n = eig.values.size();
  CMatrix scaled = eig.vectors;
  for (Eigen::Index b = 0; b < n; ++b) scaled.col(b) *= std::exp(-kI * eig.values(b) * dt);
  return scaled * eig.vectors.adjoint();
}

CMatrix expm_unitary(const CMatrix& h, double dt) { return expm_unitary(eig_hermitian(h), dt); }

cplx exp_divided_difference1(double a, double b, double dt) {
  const cplx kappa = -kI * dt;
  if (std::abs(a - b) < kDegenerate) return kappa * std::exp(kappa * (0.5 * (a + b)));
  return kappa * std::exp(kappa * a) * phi1(kappa * (b - a));
}

cplx exp_divided_difference2(double a, double b, double c, double dt) {
  double x[3] = {a, b, c};
  std::sort(x, x + 3);
  const cplx kappa = -kI * dt;
  if (x[2] - x[0] < kDegenerate) return 0.5 * kappa * kappa * std::exp(kappa * x[1]);
  return kappa * kappa * std::exp(kappa * x[1]) *
         exp_dd_u0v(kappa * (x[0] - x[1]), kappa * (x[2] - x[1]));
}

CMatrix expm_frechet(const HermitianEig& eig, const CMatrix& direction, double dt) {
  const Eigen::Index n = eig.values.size();
  CMatrix d = to_eigenbasis(eig, direction);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      d(a, b) *= exp_divided_difference1(eig.values(a), eig.values(b), dt);
  return from_eigenbasis(eig, d);
}

CMatrix expm_frechet(const CMatrix& h, const CMatrix& direction, double dt) {
  check_matrix(direction);
  return expm_frechet(eig_hermitian(h), direction, dt);
}

void expm_frechet12(const HermitianEig& eig, const CMatrix& direction, double dt, CMatrix& first,
                    CMatrix& second) {
  const Eigen::Index n = eig.values.size();
  const CMatrix d = to_eigenbasis(eig, direction);
  CMatrix l1(n, n), l2(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index c = 0; c < n; ++c) {
      l1(a, c) = d(a, c) * exp_divided_difference1(eig.values(a), eig.values(c), dt);
      cplx acc = 0.0;
      for (Eigen::Index b = 0; b < n; ++b) {
        acc += d(a, b) * d(b, c) *
               exp_divided_difference2(eig.values(a), eig.values(b), eig.values(c), dt);
      }
      l2(a, c) = 2.0 * acc;
    }
  }
  first = from_eigenbasis(eig, l1);
  second = from_eigenbasis(eig, l2);
}

CMatrix expm_frechet2(const HermitianEig& eig, const CMatrix& direction, double dt) {
  CMatrix first, second;
  expm_frechet12(eig, direction, dt, first, second);
  return second;
}

CMatrix expm_frechet2(const CMatrix& h, const CMatrix& direction, double dt) {
  check_matrix(direction);
  return expm_frechet2(eig_hermitian(h), direction, dt);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Eigen::Index n = a.rows() * b.rows();
  if (n > 4) throw InvalidMatrix("kron: result exceeds 4x4");
  CMatrix out(n, a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

double unitarity_error(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

namespace pauli {
CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }
CMatrix x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
CMatrix y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}
CMatrix z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

}  // namespace moqc
