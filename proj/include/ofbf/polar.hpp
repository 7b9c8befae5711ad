// Operator polar coordinates for a generator E with Re(eig) > 0: the adapted
// norm ||x||_0 = int_0^1 ||t^E x|| dt/t, the radial part tau_E and direction
// l_E of x = tau^E l, the unit sphere S_0, and (for m = 2) the spherical
// measure density making the polar change-of-variables formula
//   int h(x) dx = int_0^inf int_{S_0} h(r^E theta) r^{tr E - 1} sigma(dtheta) dr
// available for quadrature.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "ofbf/errors.hpp"
#include "ofbf/matcalc.hpp"

namespace ofbf {

enum class StarNorm { euclidean };  // auxiliary norm in the ||.||_0 integral

struct PolarDecomposition {
  double tau = 0.0;
  Eigen::VectorXd l;
};

struct RadialBoundsReport {
  enum class Regime { small_ball, large_ball, boundary, not_applicable };
  Regime regime = Regime::not_applicable;
  double tau = 0.0;
  double norm0 = 0.0;
  double delta = 0.0;
  // The sandwich ||x||_0-powers bracketing tau in the active regime.
  double sandwich_lo = 0.0;
  double sandwich_hi = 0.0;
  double ratio_lo = 0.0;  // tau / sandwich_lo
  double ratio_hi = 0.0;  // tau / sandwich_hi
};

class PolarSystem {
 public:
  explicit PolarSystem(Eigen::MatrixXd E,
                       StarNorm star = StarNorm::euclidean,
                       int panel_points = 16);

  const Eigen::MatrixXd& generator() const { return E_; }
  int dim() const { return static_cast<int>(E_.rows()); }
  double trace() const { return trace_; }
  double min_real_eig() const { return e_min_; }
  double max_real_eig() const { return e_max_; }
  const Spectrum& spec() const { return spec_; }

  // c^E (fast paths for diagonal and 2x2 generators).
  Eigen::MatrixXd power(double c) const;

  // e^{-uE} x, the flow the ||.||_0 integrand is built from.
  Eigen::VectorXd flow(double u, const Eigen::VectorXd& x) const;

  // ||e^{-uE} x||, allocation-free on the quadrature hot path.
  double flow_norm(double u, const Eigen::VectorXd& x) const;

  double zero_norm(const Eigen::VectorXd& x) const;
  double tau(const Eigen::VectorXd& x) const;
  PolarDecomposition decompose(const Eigen::VectorXd& x) const;
  Eigen::VectorXd direction(const Eigen::VectorXd& x) const;

  RadialBoundsReport radial_bounds_check(const Eigen::VectorXd& x,
                                         double delta) const;

 private:
  // Survival integral G_x(c) = int_c^inf ||e^{-uE} x|| du. zero_norm(x) is
  // G_x(0); log tau(x) is the root of G_x(c) = 1.
  double survival(const Eigen::VectorXd& x, double c) const;

  Eigen::MatrixXd E_;
  Spectrum spec_;
  double e_min_ = 0.0;
  double e_max_ = 0.0;
  double trace_ = 0.0;
  double panel_width_ = 0.5;
  double settle_time_ = 10.0;  // flow decay horizon before tail cutoff
  int panel_points_ = 16;
  bool diagonal_ = false;
  StarNorm star_ = StarNorm::euclidean;
};

// Angle parametrization of S_0 for m = 2: theta(s) = l_E(cos s, sin s) with
// the Jacobian density |det[E theta, theta']| of the spherical measure.
class SphereParametrization {
 public:
  explicit SphereParametrization(const PolarSystem& sys, double fd_step = 1e-5);

  Eigen::Vector2d theta(double s) const;
  double density(double s) const;
  const PolarSystem& system() const { return *sys_; }

 private:
  const PolarSystem* sys_;
  double fd_step_;
};

// Reusable tensor node set for polar-coordinate quadrature (m = 2).
struct PolarGrid {
  std::vector<double> angles;
  std::vector<Eigen::Vector2d> thetas;
  std::vector<double> angle_weights;  // (2 pi / n) * density(s_i)
  std::vector<double> radii;          // r at Gauss nodes in log r
  std::vector<double> radial_weights; // GL weight * r^{tr E} (dr = r dv)
};

PolarGrid make_polar_grid(const PolarSystem& sys, double r_min, double r_max,
                          int radial_nodes, int angular_nodes);

// Angles (mod 2 pi, both orientations) of the real eigendirections of E;
// the spherical density loses smoothness exactly there.
std::vector<double> eigendirection_angles(const Eigen::MatrixXd& E);

struct PolarQuadratureOptions {
  double r_min = 1e-8;
  double r_max = 1e8;
  int radial_nodes = 512;
  int angular_nodes = 64;
  double rel_tol = 1e-6;
  int max_refinements = 4;
};

struct QuadratureResult {
  double value = 0.0;
  double est_error = 0.0;
  int radial_nodes = 0;
  int angular_nodes = 0;
};

// Integrates h over R^m through the polar change of variables (m = 2);
// for m != 2 falls back to adaptive Cartesian quadrature over
// [-r_max, r_max]^m. Refines by node doubling until the relative change is
// below rel_tol; throws NumericalError carrying the last two estimates
// otherwise.
QuadratureResult polar_integrate(
    const PolarSystem& sys,
    const std::function<double(const Eigen::VectorXd&)>& h,
    PolarQuadratureOptions opt = {});

// Iterated adaptive quadrature of h over the box [lo, hi]^m.
double cartesian_integrate(const std::function<double(const Eigen::VectorXd&)>& h,
                           int m, double lo, double hi, double rel_tol = 1e-8);

}  // namespace ofbf
