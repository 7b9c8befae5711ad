// Matrix-valued functions on the unit sphere S_0 and their homogeneous
// extensions: a left-homogeneous function satisfies phi(c^E x) = c^H phi(x),
// a two-sided one phi(c^E x) = c^{H/2} phi(x) c^{H*/2}. Either kind is
// determined by its values on S_0 through
//   phi(x) = tau(x)^{H} phi(l(x))        (left)
//   phi(x) = tau(x)^{H/2} phi(l(x)) tau(x)^{H*/2}   (two-sided).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "ofbf/polar.hpp"

namespace ofbf {

// Function on S_0 with values in the complex n x n' matrices.
class SphericalProfile {
 public:
  using Fn = std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>;

  SphericalProfile(Fn fn, int rows, int cols);

  // Constant scalar profile.
  static SphericalProfile constant(std::complex<double> value);

  // Profile tabulated at uniform parametrization angles s_i = 2 pi i / N of
  // the given generator's sphere (m = 2), entries row-major per angle.
  // Evaluation uses periodic cubic interpolation in the angle.
  static SphericalProfile tabulated(
      const PolarSystem& sys, int rows, int cols,
      const std::vector<std::vector<std::complex<double>>>& values_per_angle);

  Eigen::MatrixXcd eval(const Eigen::VectorXd& theta) const { return fn_(theta); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  Fn fn_;
  int rows_;
  int cols_;
};

// sup of ||profile||_F over a sampled S_0.
double profile_sup_norm(const SphericalProfile& profile,
                        const PolarSystem& sys, int samples = 256);

// max over sampled theta of ||A(-theta) - conj(A(theta))||.
double profile_reality_defect(const SphericalProfile& profile,
                              const PolarSystem& sys, int samples = 128);

enum class Homogeneity { left, two_sided };

class HomogeneousFn {
 public:
  HomogeneousFn(PolarSystem generator_system, Eigen::MatrixXd left_exponent,
                std::optional<Eigen::MatrixXd> right_exponent,
                SphericalProfile profile, Homogeneity kind);

  // Defined on R^m \ {0}; throws DomainError at the origin.
  Eigen::MatrixXcd eval(const Eigen::VectorXd& x) const;

  // Evaluation in polar form when (tau, l) are already known: the hot path
  // for quadratures running in polar coordinates.
  Eigen::MatrixXcd eval_polar(double tau, const Eigen::VectorXd& l) const;

  const PolarSystem& system() const { return sys_; }
  const SphericalProfile& profile() const { return profile_; }
  const Eigen::MatrixXd& left_exponent() const { return left_; }
  Homogeneity kind() const { return kind_; }
  int rows() const { return profile_.rows(); }
  int cols() const { return profile_.cols(); }

 private:
  PolarSystem sys_;
  Eigen::MatrixXd left_;
  std::optional<Eigen::MatrixXd> right_;
  SphericalProfile profile_;
  Homogeneity kind_;
};

// Builds the homogeneous function generated by profile values on S_0.
HomogeneousFn extend_from_sphere(const PolarSystem& generator_system,
                                 const Eigen::MatrixXd& left_exponent,
                                 const SphericalProfile& profile,
                                 Homogeneity kind,
                                 std::optional<Eigen::MatrixXd>
                                     right_exponent = std::nullopt);

struct HomogeneityReport {
  double max_rel_violation = 0.0;
  bool pass = false;
  double worst_c = 1.0;
  Eigen::VectorXd worst_x;
};

// Audits the scaling relation on random (c, x) pairs. The generic overload
// takes a raw evaluator so that functions not built through
// extend_from_sphere can be audited too.
HomogeneityReport check_homogeneity(
    const std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>& f,
    const PolarSystem& generator_system, const Eigen::MatrixXd& left_exponent,
    Homogeneity kind, int samples, double tol, std::uint64_t seed = 2024,
    double c_min = 0.01, double c_max = 100.0);

HomogeneityReport check_homogeneity(const HomogeneousFn& f, int samples,
                                    double tol, std::uint64_t seed = 2024,
                                    double c_min = 0.01, double c_max = 100.0);

}  // namespace ofbf
