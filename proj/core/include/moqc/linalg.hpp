#pragma once

// Dense complex linear algebra for 2- and 4-level systems.
//
// Everything here works in units with hbar = 1. Matrices are small enough
// that exactness matters more than asymptotic cost, so exponentials and their
// directional derivatives are all evaluated in the eigenbasis of the
// Hermitian generator.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace moqc {

using cplx = std::complex<double>;

// Fixed upper bound of 4x4 keeps every matrix on the stack.
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, 4, 4>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using RVector4 = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

class InvalidMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct HermitianEig {
  RVector4 values;  // ascending
  CMatrix vectors;  // columns are eigenvectors
};

/// Throws InvalidMatrix unless m is square, of dimension 2 or 4, and finite.
void check_matrix(const CMatrix& m);

/// Eigendecomposition of the Hermitian part (H + H^dagger)/2.
HermitianEig eig_hermitian(const CMatrix& h);

/// exp(-i H dt).
CMatrix expm_unitary(const CMatrix& h, double dt);
CMatrix expm_unitary(const HermitianEig& eig, double dt);

/// d/da exp(-i (H + a D) dt) at a = 0.
CMatrix expm_frechet(const CMatrix& h, const CMatrix& direction, double dt);
CMatrix expm_frechet(const HermitianEig& eig, const CMatrix& direction, double dt);

/// d^2/da^2 exp(-i (H + a D) dt) at a = 0.
CMatrix expm_frechet2(const CMatrix& h, const CMatrix& direction, double dt);
CMatrix expm_frechet2(const HermitianEig& eig, const CMatrix& direction, double dt);

/// Both derivatives sharing one change of basis.
void expm_frechet12(const HermitianEig& eig, const CMatrix& direction, double dt,
                    CMatrix& first, CMatrix& second);

// Divided differences of f(x) = exp(-i x dt). Exposed for tests.
cplx exp_divided_difference1(double a, double b, double dt);
cplx exp_divided_difference2(double a, double b, double c, double dt);

CMatrix kron(const CMatrix& a, const CMatrix& b);
double frobenius_distance(const CMatrix& a, const CMatrix& b);
double unitarity_error(const CMatrix& u);

namespace pauli {
CMatrix identity(int dim = 2);
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

}  // namespace moqc
