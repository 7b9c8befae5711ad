#include "ofbf/matcalc.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace ofbf {

namespace {

// sinh(x)/x and sin(x)/x with series fallback near zero.
double sinhc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

bool is_diagonal(const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

std::string eig_list(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "{";
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (i) os << ", ";
    os << s.eigenvalues[i].real();
    if (std::abs(s.eigenvalues[i].imag()) > 0)
      os << (s.eigenvalues[i].imag() >= 0 ? "+" : "") << s.eigenvalues[i].imag()
         << "i";
  }
  os << "}";
  return os.str();
}

}  // namespace

bool is_finite(const Eigen::MatrixXd& M) { return M.allFinite(); }

Eigen::Matrix2d expm2(const Eigen::Matrix2d& A) {
  const double mu = 0.5 * (A(0, 0) + A(1, 1));
  Eigen::Matrix2d B = A;
  B(0, 0) -= mu;
  B(1, 1) -= mu;
  const double delta2 = B(0, 0) * B(0, 0) + A(0, 1) * A(1, 0);
  double ch, shc;
  if (delta2 >= 0.0) {
    const double d = std::sqrt(delta2);
    ch = std::cosh(d);
    shc = sinhc(d);
  } else {
    const double w = std::sqrt(-delta2);
    ch = std::cos(w);
    shc = sinc(w);
  }
  const double e = std::exp(mu);
  Eigen::Matrix2d R = shc * B;
  R(0, 0) += ch;
  R(1, 1) += ch;
  return e * R;
}

namespace detail {

Eigen::MatrixXd matrix_power_impl(const Eigen::MatrixXd& M, double c) {
  if (M.rows() != M.cols())
    throw ValidationError("matrix_power: matrix must be square");
  if (!M.allFinite())
    throw ValidationError("matrix_power: matrix has non-finite entries");
  if (!(c > 0.0) || !std::isfinite(c))
    throw DomainError("matrix_power: base must be a positive real, got " +
                      std::to_string(c));
  const Eigen::Index d = M.rows();
  if (c == 1.0) return Eigen::MatrixXd::Identity(d, d);
  const double lc = std::log(c);
  if (is_diagonal(M)) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) R(i, i) = std::exp(lc * M(i, i));
    return R;
  }
  if (d == 2) return expm2(Eigen::Matrix2d(lc * M));
  return (lc * M).exp();
}

Spectrum spectrum_impl(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw ValidationError("spectrum: matrix must be square");
  if (!M.allFinite())
    throw ValidationError("spectrum: matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError(
        "spectrum: QR eigensolver failed to converge (info=" +
        std::to_string(static_cast<int>(solver.info())) + ", dim=" +
        std::to_string(M.rows()) + ")");
  Spectrum s;
  s.eigenvalues = solver.eigenvalues();
  s.min_real = s.eigenvalues.real().minCoeff();
  s.max_real = s.eigenvalues.real().maxCoeff();
  return s;
}

}  // namespace detail

ExponentCheck check_exponents(const Eigen::MatrixXd& E,
                              const Eigen::MatrixXd& H) {
  if (E.rows() != E.cols() || H.rows() != H.cols())
    throw ValidationError("check_exponents: E and H must be square");
  ExponentCheck r;
  r.spec_E = spectrum(E);
  r.spec_H = spectrum(H);
  std::ostringstream os;
  os.precision(17);
  if (!(r.spec_H.min_real > 0.0)) {
    os.str("");
    os << "min Re(eig H) = " << r.spec_H.min_real
       << " <= 0, violating 0 < min Re(eig H); eig(H) = "
       << eig_list(r.spec_H);
    r.violations.push_back(os.str());
  }
  // eig(E*) is the conjugate of eig(E): identical real parts.
  if (!(r.spec_H.max_real < r.spec_E.min_real)) {
    os.str("");
    os << "max Re(eig H) = " << r.spec_H.max_real
       << " >= min Re(eig E*) = " << r.spec_E.min_real
       << ", violating max Re(eig H) < min Re(eig E*); eig(H) = "
       << eig_list(r.spec_H) << ", eig(E) = " << eig_list(r.spec_E);
    r.violations.push_back(os.str());
  }
  r.ok = r.violations.empty();
  return r;
}

KernelCondition kernel_condition(const Eigen::MatrixXd& E,
                                 const Eigen::MatrixXd& H) {
  const Spectrum se = spectrum(E);
  const Spectrum sh = spectrum(H);
  KernelCondition k;
  k.lhs = sh.max_real + 0.5 * E.trace();
  k.rhs = static_cast<double>(E.rows()) * se.min_real;
  k.ok = k.lhs < k.rhs;
  std::ostringstream os;
  os.precision(17);
  os << "max eig(H) + tr(E)/2 = " << k.lhs << (k.ok ? " < " : " >= ")
     << "m * min eig(E) = " << k.rhs;
  k.description = os.str();
  return k;
}

ExponentPair validate_exponents(const Eigen::MatrixXd& E,
                                const Eigen::MatrixXd& H,
                                bool require_kernel_condition) {
  if (!E.allFinite() || !H.allFinite())
    throw ValidationError("validate_exponents: non-finite entries");
  ExponentCheck c = check_exponents(E, H);
  if (!c.ok) {
    std::string msg = "exponent validation failed: ";
    for (std::size_t i = 0; i < c.violations.size(); ++i) {
      if (i) msg += "; ";
      msg += c.violations[i];
    }
    throw ValidationError(msg);
  }
  if (require_kernel_condition) {
    const KernelCondition k = kernel_condition(E, H);
    if (!k.ok)
      throw ValidationError("kernel condition violated: " + k.description);
  }
  ExponentPair p;
  p.E = E;
  p.H = H;
  p.m = static_cast<int>(E.rows());
  p.n = static_cast<int>(H.rows());
  p.spec_E = c.spec_E;
  p.spec_H = c.spec_H;
  return p;
}

RealDiagonalization real_diagonalize(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw ValidationError("real_diagonalize: matrix must be square");
  if (!M.allFinite())
    throw ValidationError("real_diagonalize: non-finite entries");
  const Eigen::Index d = M.rows();
  RealDiagonalization r;

  const double scale = std::max(1.0, M.norm());
  if ((M - M.transpose()).norm() <= 1e-13 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
      throw NumericalError("real_diagonalize: symmetric eigensolver failed");
    r.V = es.eigenvectors();
    r.D = es.eigenvalues();
    r.V_inv = r.V.transpose();
    return r;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw NumericalError("real_diagonalize: eigensolver failed to converge");
  const Eigen::VectorXcd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(vals[i].imag()) > 1e-10 * (1.0 + std::abs(vals[i])))
      throw Error("not real-diagonalizable: complex eigenvalue " +
                  std::to_string(vals[i].real()) + " + " +
                  std::to_string(vals[i].imag()) + "i");

  r.D = vals.real();
  r.V.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXcd col = es.eigenvectors().col(j);
    // Real eigenvalue of a real matrix: the eigenvector is real up to a
    // phase. Rotate the largest entry onto the real axis.
    Eigen::Index k;
    col.cwiseAbs().maxCoeff(&k);
    col *= std::conj(col[k]) / std::abs(col[k]);
    r.V.col(j) = col.real();
    r.V.col(j).normalize();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.V);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e8)
    throw Error(
        "not real-diagonalizable: defective spectrum (eigenvector matrix "
        "condition number " +
        std::to_string(smin > 0 ? smax / smin : INFINITY) + " > 1e8)");
  r.V_inv = r.V.partialPivLu().solve(Eigen::MatrixXd::Identity(d, d));

  if ((r.V * r.D.asDiagonal() * r.V_inv - M).norm() > 1e-9 * scale)
    throw Error("not real-diagonalizable: reconstruction residual too large");
  return r;
}

}  // namespace ofbf
