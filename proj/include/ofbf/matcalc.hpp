// Matrix functional calculus: real matrix powers c^M = exp(log(c) M),
// spectra, real diagonalization, and validation of the eigenvalue
// inequalities that the field exponents (E, H) must satisfy.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ofbf/errors.hpp"

namespace ofbf {

struct Spectrum {
  Eigen::VectorXcd eigenvalues;  // with multiplicity
  double min_real = 0.0;
  double max_real = 0.0;
};

// M = V * D.asDiagonal() * V_inv with real D and real well-conditioned V.
struct RealDiagonalization {
  Eigen::MatrixXd V;
  Eigen::VectorXd D;
  Eigen::MatrixXd V_inv;
};

// Domain exponent E (m x m) and range exponent H (n x n) passing the
// spectral inequality 0 < min Re eig(H) <= max Re eig(H) < min Re eig(E*).
struct ExponentPair {
  Eigen::MatrixXd E;
  Eigen::MatrixXd H;
  int m = 0;
  int n = 0;
  Spectrum spec_E;
  Spectrum spec_H;
};

struct ExponentCheck {
  bool ok = false;
  std::vector<std::string> violations;
  Spectrum spec_E;
  Spectrum spec_H;
};

// Status of the kernel-construction inequality
// max eig(H) + tr(E)/2 < m * min eig(E).
struct KernelCondition {
  bool ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string description;
};

namespace detail {
Eigen::MatrixXd matrix_power_impl(const Eigen::MatrixXd& M, double c);
Spectrum spectrum_impl(const Eigen::MatrixXd& M);
}  // namespace detail

// c^M for c > 0, defined through the exponential series exp(log(c) M).
template <class Derived>
Eigen::MatrixXd matrix_power(const Eigen::MatrixBase<Derived>& M, double c) {
  return detail::matrix_power_impl(M.derived(), c);
}

template <class Derived>
Spectrum spectrum(const Eigen::MatrixBase<Derived>& M) {
  return detail::spectrum_impl(M.derived());
}

// Closed-form exponential of a 2x2 real matrix; used on hot paths.
Eigen::Matrix2d expm2(const Eigen::Matrix2d& A);

// Lists every violated inequality instead of throwing.
ExponentCheck check_exponents(const Eigen::MatrixXd& E,
                              const Eigen::MatrixXd& H);

// Throws ValidationError naming the failing inequality and the offending
// eigenvalues. When require_kernel_condition is set, the moving-average
// inequality is enforced as well.
ExponentPair validate_exponents(const Eigen::MatrixXd& E,
                                const Eigen::MatrixXd& H,
                                bool require_kernel_condition = false);

KernelCondition kernel_condition(const Eigen::MatrixXd& E,
                                 const Eigen::MatrixXd& H);

// Fails with Error("not real-diagonalizable: ...") on complex or defective
// spectra (eigenvector condition number above 1e8).
RealDiagonalization real_diagonalize(const Eigen::MatrixXd& M);

bool is_finite(const Eigen::MatrixXd& M);

}  // namespace ofbf
