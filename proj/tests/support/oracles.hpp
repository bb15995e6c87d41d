#pragma once

// Reference implementations used only by tests. They share no code with the
// library beyond the public types.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "moqc/fronts.hpp"
#include "moqc/moea.hpp"

namespace oracle {

using moqc::CMatrix;

/// exp(-i H dt) through Eigen's unsupported MatrixFunctions (Pade).
Eigen::MatrixXcd expm_pade(const Eigen::MatrixXcd& h, double dt);

/// Direct product of step exponentials, H_m assembled from Pauli matrices.
Eigen::MatrixXcd propagate_naive(const moqc::SpinSystem& sys, const moqc::ControlField& field);

/// Central differences of J over the flat sample vector.
std::vector<double> fd_gradient(const moqc::Objective& obj, const moqc::SpinSystem& sys,
                                const moqc::ControlField& field, double h = 1e-6);

/// Second differences of J along additive noise on one spin's operator.
Eigen::MatrixXd fd_hessian(const moqc::Objective& obj, const moqc::SpinSystem& sys,
                           const moqc::ControlField& field, moqc::NoiseChannel channel, int spin,
                           double h = 1e-3);

/// O(n^2) pairwise filter with the same duplicate convention as the library:
/// a point survives if nothing dominates it and no earlier point is identical
/// in every criterion.
std::vector<moqc::FrontPoint> brute_force_filter(const std::vector<moqc::FrontPoint>& pts,
                                                 const std::vector<moqc::Criterion>& crit);

/// Monte-Carlo estimate of the dominated area inside the reference box,
/// with the lower corner at `lower`.
double mc_area(const std::vector<moqc::Point2>& front, moqc::Point2 lower, moqc::Point2 reference,
               int samples, std::uint64_t seed);

/// |a - b| <= max(rtol |b|, atol) for every entry.
bool close(double a, double b, double rtol, double atol);

}  // namespace oracle
