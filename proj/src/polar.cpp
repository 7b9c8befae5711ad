#include "ofbf/polar.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>

#include "ofbf/quadrature.hpp"

namespace ofbf {

namespace {

bool matrix_is_diagonal(const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

}  // namespace

PolarSystem::PolarSystem(Eigen::MatrixXd E, StarNorm star, int panel_points)
    : E_(std::move(E)), panel_points_(panel_points), star_(star) {
  if (E_.rows() != E_.cols() || E_.rows() < 1)
    throw ValidationError("PolarSystem: generator must be square");
  if (!E_.allFinite())
    throw ValidationError("PolarSystem: generator has non-finite entries");
  spec_ = spectrum(E_);
  e_min_ = spec_.min_real;
  e_max_ = spec_.max_real;
  trace_ = E_.trace();
  if (!(e_min_ > 0.0))
    throw ValidationError(
        "PolarSystem: generator must have eigenvalues with positive real "
        "part (min Re eig = " +
        std::to_string(e_min_) + "); the polar map is not a homeomorphism");
  diagonal_ = matrix_is_diagonal(E_);
  const double radius = spec_.eigenvalues.cwiseAbs().maxCoeff();
  panel_width_ = 1.0 / (1.0 + radius);
  // Beyond this horizon the flow norm decays like exp(-e_min u) with any
  // polynomial transient already passed.
  settle_time_ = (2.0 * E_.rows() + 6.0) / e_min_;
}

Eigen::MatrixXd PolarSystem::power(double c) const {
  return matrix_power(E_, c);
}

Eigen::VectorXd PolarSystem::flow(double u, const Eigen::VectorXd& x) const {
  if (diagonal_) {
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      y[i] = std::exp(-u * E_(i, i)) * x[i];
    return y;
  }
  if (E_.rows() == 2) {
    const Eigen::Matrix2d F = expm2(Eigen::Matrix2d(-u * E_));
    return F * Eigen::Vector2d(x);
  }
  return (-u * E_).exp() * x;
}

double PolarSystem::flow_norm(double u, const Eigen::VectorXd& x) const {
  if (diagonal_) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = std::exp(-u * E_(i, i)) * x[i];
      s += y * y;
    }
    return std::sqrt(s);
  }
  if (E_.rows() == 2) {
    const Eigen::Matrix2d F = expm2(Eigen::Matrix2d(-u * E_));
    return (F * Eigen::Vector2d(x[0], x[1])).norm();
  }
  return ((-u * E_).exp() * x).norm();
}

double PolarSystem::survival(const Eigen::VectorXd& x, double c) const {
  // Integrand of the adapted norm after t = e^{-u}: N(u) = ||e^{-uE} x||.
  const auto N = [&](double u) { return flow_norm(u, x); };

  double base_width = panel_width_;
  for (int attempt = 0; attempt < 4; ++attempt) {
    double total = 0.0;
    double coarse_total = 0.0;
    double lo = c;
    double width = base_width;
    int quiet = 0;
    const int max_panels = 4000;
    bool done = false;
    for (int k = 0; k < max_panels; ++k) {
      const double hi = lo + width;
      const double fine = quad::gauss_panel(N, lo, hi, panel_points_);
      const double coarse = quad::gauss_panel(N, lo, hi, panel_points_ / 2);
      total += fine;
      coarse_total += coarse;
      lo = hi;
      // Once the panel mass is clearly in the exponential tail, widen the
      // panels while chasing it down to rounding level.
      if (fine <= 1e-4 * std::max(total, 1e-300) || lo - c >= settle_time_)
        width = std::min(2.0 * width, 16.0 * base_width);
      if (fine <= 1e-15 * std::max(total, 1e-300)) {
        if (++quiet >= 2) {
          done = true;
          break;
        }
      } else {
        quiet = 0;
      }
    }
    if (!done)
      throw NumericalError(
          "zero_norm: flow integral did not settle within panel budget");
    const double err = std::abs(total - coarse_total);
    if (err <= 1e-8 * std::max(std::abs(total), 1e-300)) return total;
    base_width *= 0.5;  // refine and retry
  }
  throw NumericalError(
      "zero_norm: quadrature refinement stalled above 1e-8 relative");
}

double PolarSystem::zero_norm(const Eigen::VectorXd& x) const {
  if (x.size() != E_.rows())
    throw ValidationError("zero_norm: dimension mismatch");
  if (!x.allFinite())
    throw ValidationError("zero_norm: non-finite input");
  if (x.norm() == 0.0) return 0.0;
  return survival(x, 0.0);
}

double PolarSystem::tau(const Eigen::VectorXd& x) const {
  if (x.size() != E_.rows())
    throw ValidationError("tau: dimension mismatch");
  if (!x.allFinite()) throw ValidationError("tau: non-finite input");
  if (x.norm() == 0.0)
    throw DomainError("tau: undefined at x = 0");

  const double c_cap = std::log(1e12);
  // Bracket the root of G(c) = 1. G is strictly decreasing.
  double c_lo, c_hi, g_lo, g_hi;
  double c = 0.0;
  double g = survival(x, c);
  if (g > 1.0) {
    c_lo = c;
    g_lo = g;
    double step = 1.0;
    do {
      c += step;
      step *= 2.0;
      if (c > c_cap)
        throw NumericalError("tau: radius bracket exceeded [1e-12, 1e12]");
      g = survival(x, c);
    } while (g > 1.0);
    c_hi = c;
    g_hi = g;
  } else {
    c_hi = c;
    g_hi = g;
    double step = 1.0;
    do {
      c -= step;
      step *= 2.0;
      if (c < -c_cap)
        throw NumericalError("tau: radius bracket exceeded [1e-12, 1e12]");
      g = survival(x, c);
    } while (g <= 1.0);
    c_lo = c;
    g_lo = g;
  }
  (void)g_lo;
  (void)g_hi;

  // Safeguarded Newton: G'(c) = -||e^{-cE} x||.
  c = 0.5 * (c_lo + c_hi);
  for (int it = 0; it < 80; ++it) {
    const double gc = survival(x, c);
    if (gc > 1.0)
      c_lo = c;
    else
      c_hi = c;
    const double slope = flow_norm(c, x);
    double next = c + (gc - 1.0) / slope;
    if (!(next > c_lo && next < c_hi)) next = 0.5 * (c_lo + c_hi);
    const double dc = std::abs(next - c);
    c = next;
    if (dc <= 1e-13) return std::exp(c);
  }
  throw NumericalError("tau: root iteration failed to reach tolerance");
}

PolarDecomposition PolarSystem::decompose(const Eigen::VectorXd& x) const {
  PolarDecomposition d;
  d.tau = tau(x);
  d.l = flow(std::log(d.tau), x);
  return d;
}

Eigen::VectorXd PolarSystem::direction(const Eigen::VectorXd& x) const {
  return decompose(x).l;
}

RadialBoundsReport PolarSystem::radial_bounds_check(const Eigen::VectorXd& x,
                                                    double delta) const {
  if (!(delta > 0.0) || !(delta < e_min_))
    throw DomainError(
        "radial_bounds_check: delta must lie in (0, min Re eig E)");
  RadialBoundsReport r;
  r.delta = delta;
  r.norm0 = zero_norm(x);
  r.tau = tau(x);
  const double p_small = 1.0 / (e_min_ + delta);
  const double p_large = 1.0 / (e_max_ - delta);
  // Matches the accuracy contract of tau and zero_norm.
  const double eps = 1e-8;
  const bool small = r.norm0 <= 1.0 + eps && r.tau <= 1.0 + eps;
  const bool large = r.norm0 > 1.0 - eps && r.tau > 1.0 - eps;
  if (small && large) {
    r.regime = RadialBoundsReport::Regime::boundary;
    r.sandwich_lo = r.sandwich_hi = 1.0;
    r.ratio_lo = r.ratio_hi = r.tau;
    return r;
  }
  if (small) {
    r.regime = RadialBoundsReport::Regime::small_ball;
    r.sandwich_lo = std::pow(r.norm0, p_small);
    r.sandwich_hi = std::pow(r.norm0, p_large);
  } else if (large) {
    r.regime = RadialBoundsReport::Regime::large_ball;
    r.sandwich_lo = std::pow(r.norm0, p_large);
    r.sandwich_hi = std::pow(r.norm0, p_small);
  } else {
    r.regime = RadialBoundsReport::Regime::not_applicable;
    return r;
  }
  r.ratio_lo = r.tau / r.sandwich_lo;
  r.ratio_hi = r.tau / r.sandwich_hi;
  return r;
}

SphereParametrization::SphereParametrization(const PolarSystem& sys,
                                             double fd_step)
    : sys_(&sys), fd_step_(fd_step) {
  if (sys.dim() != 2)
    throw ValidationError(
        "SphereParametrization: only constructed for m = 2");
}

Eigen::Vector2d SphereParametrization::theta(double s) const {
  Eigen::VectorXd u(2);
  u << std::cos(s), std::sin(s);
  return sys_->direction(u);
}

double SphereParametrization::density(double s) const {
  const Eigen::Vector2d th = theta(s);
  const Eigen::Vector2d dth =
      (theta(s + fd_step_) - theta(s - fd_step_)) / (2.0 * fd_step_);
  if (!th.allFinite() || !dth.allFinite())
    throw NumericalError("sphere density: non-finite derivative at s = " +
                         std::to_string(s));
  Eigen::Matrix2d J;
  J.col(0) = sys_->generator() * th;
  J.col(1) = dth;
  return std::abs(J.determinant());
}

std::vector<double> eigendirection_angles(const Eigen::MatrixXd& E) {
  std::vector<double> angles;
  Eigen::EigenSolver<Eigen::MatrixXd> es(E);
  if (es.info() != Eigen::Success) return angles;
  for (Eigen::Index j = 0; j < E.rows(); ++j) {
    const std::complex<double> lam = es.eigenvalues()[j];
    if (std::abs(lam.imag()) > 1e-9 * (1.0 + std::abs(lam))) continue;
    Eigen::VectorXcd v = es.eigenvectors().col(j);
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::conj(v[k]) / std::abs(v[k]);
    if (v.imag().norm() > 1e-8) continue;
    double a = std::atan2(v[1].real(), v[0].real());
    if (a < 0) a += M_PI;  // directions, not orientations
    angles.push_back(a);
    angles.push_back(a + M_PI);
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) {
                             return std::abs(a - b) < 1e-9;
                           }),
               angles.end());
  return angles;
}

PolarGrid make_polar_grid(const PolarSystem& sys, double r_min, double r_max,
                          int radial_nodes, int angular_nodes) {
  if (sys.dim() != 2)
    throw ValidationError("make_polar_grid: only available for m = 2");
  PolarGrid g;
  const SphereParametrization sphere(sys);

  // The spherical density has algebraic kinks at real eigendirections of E.
  // Between kinks, use cos-graded Gauss panels whose nodes cluster toward
  // the arc ends; with no real eigendirection the density is smooth and a
  // uniform midpoint ring suffices.
  const std::vector<double> kinks = eigendirection_angles(sys.generator());
  if (kinks.empty()) {
    g.angles.resize(angular_nodes);
    const double ds = 2.0 * M_PI / angular_nodes;
    for (int i = 0; i < angular_nodes; ++i) g.angles[i] = (i + 0.5) * ds;
    g.angle_weights.assign(angular_nodes, ds);
  } else {
    const auto& rule = quad::gauss_legendre(16);
    const std::size_t arcs = kinks.size();
    for (std::size_t k = 0; k < arcs; ++k) {
      const double a = kinks[k];
      const double b = k + 1 < arcs ? kinks[k + 1] : kinks[0] + 2.0 * M_PI;
      const double len = b - a;
      const int panels = std::max(
          1, static_cast<int>(std::lround(angular_nodes * len /
                                          (2.0 * M_PI * 16.0))));
      for (int p = 0; p < panels; ++p) {
        // panel in the graded variable w with s = a + len*(1-cos(pi w))/2
        const double w_lo = static_cast<double>(p) / panels;
        const double w_hi = static_cast<double>(p + 1) / panels;
        for (int i = 0; i < 16; ++i) {
          const double w =
              0.5 * (w_lo + w_hi) + 0.5 * (w_hi - w_lo) * rule.nodes[i];
          const double s = a + 0.5 * len * (1.0 - std::cos(M_PI * w));
          const double jac = 0.5 * len * M_PI * std::sin(M_PI * w);
          g.angles.push_back(s);
          g.angle_weights.push_back(0.5 * (w_hi - w_lo) * rule.weights[i] *
                                    jac);
        }
      }
    }
  }

  const std::size_t na = g.angles.size();
  g.thetas.resize(na);
  std::vector<double> densities(na);
  parallel_for(na, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      g.thetas[i] = sphere.theta(g.angles[i]);
      densities[i] = sphere.density(g.angles[i]);
    }
  });
  for (std::size_t i = 0; i < na; ++i) g.angle_weights[i] *= densities[i];

  const double q = sys.trace();
  const double v_lo = std::log(r_min);
  const double v_hi = std::log(r_max);
  const int panels = std::max(1, radial_nodes / 16);
  const auto& rule = quad::gauss_legendre(16);
  const double pw = (v_hi - v_lo) / panels;
  g.radii.reserve(panels * 16);
  g.radial_weights.reserve(panels * 16);
  for (int p = 0; p < panels; ++p) {
    const double a = v_lo + p * pw;
    const double mid = a + 0.5 * pw;
    for (int i = 0; i < 16; ++i) {
      const double v = mid + 0.5 * pw * rule.nodes[i];
      g.radii.push_back(std::exp(v));
      g.radial_weights.push_back(0.5 * pw * rule.weights[i] *
                                 std::exp(q * v));
    }
  }
  return g;
}

QuadratureResult polar_integrate(
    const PolarSystem& sys,
    const std::function<double(const Eigen::VectorXd&)>& h,
    PolarQuadratureOptions opt) {
  if (sys.dim() != 2) {
    QuadratureResult res;
    res.value = cartesian_integrate(h, sys.dim(), -opt.r_max, opt.r_max,
                                    opt.rel_tol);
    res.est_error = std::abs(res.value) * opt.rel_tol;
    return res;
  }

  double prev = 0.0;
  bool have_prev = false;
  int nr = opt.radial_nodes;
  int na = opt.angular_nodes;
  for (int level = 0; level <= opt.max_refinements; ++level) {
    const PolarGrid grid = make_polar_grid(sys, opt.r_min, opt.r_max, nr, na);
    const std::size_t R = grid.radii.size();
    std::vector<double> partial(R, 0.0);
    parallel_for(R, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const Eigen::MatrixXd rE = sys.power(grid.radii[i]);
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.thetas.size(); ++j)
          acc += grid.angle_weights[j] * h(rE * grid.thetas[j]);
        partial[i] = acc * grid.radial_weights[i];
      }
    });
    const double value = pairwise_sum(partial);
    if (have_prev) {
      const double delta = std::abs(value - prev);
      if (delta <= opt.rel_tol * std::max(std::abs(value), 1e-300)) {
        QuadratureResult res;
        res.value = value;
        res.est_error = delta;
        res.radial_nodes = nr;
        res.angular_nodes = na;
        return res;
      }
    }
    prev = value;
    have_prev = true;
    nr *= 2;
    na *= 2;
  }
  throw NumericalError("polar_integrate: refinement not converging", prev,
                       prev);
}

namespace {

double cartesian_rec(const std::function<double(const Eigen::VectorXd&)>& h,
                     Eigen::VectorXd& x, int level, double lo, double hi,
                     double tol) {
  auto f = [&](double t) {
    x[level] = t;
    if (level + 1 == x.size()) return h(x);
    return cartesian_rec(h, x, level + 1, lo, hi, tol * 0.5);
  };
  quad::AdaptiveOptions opt;
  opt.rel_tol = tol;
  opt.max_depth = 12;
  return quad::integrate_adaptive(f, lo, hi, opt);
}

}  // namespace

double cartesian_integrate(
    const std::function<double(const Eigen::VectorXd&)>& h, int m, double lo,
    double hi, double rel_tol) {
  Eigen::VectorXd x(m);
  return cartesian_rec(h, x, 0, lo, hi, rel_tol);
}

}  // namespace ofbf
