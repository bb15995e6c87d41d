#pragma once

// Fixed-dimension kernels behind propagate / interaction_generators. The
// public linalg functions are the reference implementation; these produce the
// same quantities with compile-time sizes and a per-step table of divided
// differences computed from only D exponentials.

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "moqc/linalg.hpp"

namespace moqc::detail {

template <int D>
using Mat = Eigen::Matrix<cplx, D, D>;
template <int D>
using Vec = Eigen::Matrix<cplx, D, 1>;

inline constexpr double kDegenerate = 1e-9;
inline constexpr double kSeriesRadius = 0.1;

inline cplx phi1_series(cplx z) {
  cplx term = 1.0, sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= z / double(k + 1);
    sum += term;
  }
  return sum;
}

// Second divided difference of e^y at (u, 0, v) for |u - v| < kSeriesRadius.
inline cplx dd_u0v_series(cplx u, cplx v) {
  cplx h = 1.0, upow = 1.0, sum = 0.5;
  double fact = 2.0;
  for (int k = 2; k <= 14; ++k) {
    upow *= u;
    h = upow + v * h;
    fact *= double(k + 1);
    sum += h / fact;
  }
  return sum;
}

template <int D>
struct StepSpectrum {
  Eigen::Matrix<double, D, 1> values;
  Mat<D> vectors;
  Vec<D> phases;  // exp(-i lambda_a dt)
  Mat<D> dd1;     // f[lambda_a, lambda_b]
  double dt = 0.0;

  void build(const HermitianEig& eig, double step) {
    values = eig.values;
    vectors = eig.vectors;
    dt = step;
    const cplx kappa(0.0, -dt);
    for (int a = 0; a < D; ++a) phases(a) = std::exp(kappa * values(a));
    for (int a = 0; a < D; ++a) {
      dd1(a, a) = kappa * phases(a);
      for (int b = a + 1; b < D; ++b) {
        const double gap = values(b) - values(a);
        cplx v;
        if (std::abs(gap) < kDegenerate) {
          v = kappa * std::exp(kappa * (0.5 * (values(a) + values(b))));
        } else if (std::abs(gap) * dt < kSeriesRadius) {
          v = kappa * phases(a) * phi1_series(kappa * gap);
        } else {
          v = (phases(b) - phases(a)) / gap;
        }
        dd1(a, b) = v;
        dd1(b, a) = v;
      }
    }
  }

  cplx dd2(int a, int b, int c) const {
    int idx[3] = {a, b, c};
    std::sort(idx, idx + 3, [&](int p, int q) { return values(p) < values(q); });
    const double x0 = values(idx[0]), x1 = values(idx[1]), x2 = values(idx[2]);
    const cplx kappa(0.0, -dt);
    if (x2 - x0 < kDegenerate) return 0.5 * kappa * kappa * phases(idx[1]);
    if ((x2 - x0) * dt >= kSeriesRadius) return (dd1(idx[0], idx[1]) - dd1(idx[1], idx[2])) / (x0 - x2);
    return kappa * kappa * phases(idx[1]) * dd_u0v_series(kappa * (x0 - x1), kappa * (x2 - x1));
  }

  Mat<D> unitary() const { return vectors * phases.asDiagonal() * vectors.adjoint(); }

  Mat<D> frechet(const Mat<D>& direction) const {
    Mat<D> d = vectors.adjoint() * direction * vectors;
    d = d.cwiseProduct(dd1);
    return vectors * d * vectors.adjoint();
  }

  void frechet12(const Mat<D>& direction, Mat<D>& first, Mat<D>& second) const {
    const Mat<D> d = vectors.adjoint() * direction * vectors;
    Mat<D> l2;
    for (int a = 0; a < D; ++a) {
      for (int c = 0; c < D; ++c) {
        cplx acc = 0.0;
        for (int b = 0; b < D; ++b) acc += d(a, b) * d(b, c) * dd2(a, b, c);
        l2(a, c) = 2.0 * acc;
      }
    }
    first = vectors * d.cwiseProduct(dd1) * vectors.adjoint();
    second = vectors * l2 * vectors.adjoint();
  }
};

}  // namespace moqc::detail
