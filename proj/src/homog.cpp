#include "ofbf/homog.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <random>

namespace ofbf {

namespace {

using cd = std::complex<double>;

// Periodic cubic spline on the uniform grid s_i = i h, h = 2 pi / N.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<cd> y, double period) : y_(std::move(y)) {
    N_ = static_cast<int>(y_.size());
    h_ = period / N_;
    solve_moments();
  }

  cd eval(double s) const {
    s = std::fmod(s, N_ * h_);
    if (s < 0) s += N_ * h_;
    int i = static_cast<int>(s / h_);
    if (i >= N_) i = N_ - 1;
    const int j = (i + 1) % N_;
    const double a = (i + 1) * h_ - s;
    const double b = s - i * h_;
    return M_[i] * (a * a * a) / (6.0 * h_) + M_[j] * (b * b * b) / (6.0 * h_) +
           (y_[i] / h_ - M_[i] * h_ / 6.0) * a +
           (y_[j] / h_ - M_[j] * h_ / 6.0) * b;
  }

 private:
  void solve_moments() {
    // Cyclic tridiagonal system (1, 4, 1) M = d by Sherman-Morrison.
    const int n = N_;
    std::vector<cd> d(n);
    for (int i = 0; i < n; ++i) {
      const cd ym = y_[(i + n - 1) % n];
      const cd yp = y_[(i + 1) % n];
      d[i] = 6.0 * (yp - 2.0 * y_[i] + ym) / (h_ * h_);
    }
    if (n == 1) {
      M_ = {cd(0.0)};
      return;
    }
    if (n == 2) {
      // degenerate cycle: 4 M_i + 2 M_j = d_i
      M_.resize(2);
      M_[0] = (2.0 * d[0] - d[1]) / 6.0;
      M_[1] = (2.0 * d[1] - d[0]) / 6.0;
      return;
    }
    const double gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    auto thomas = [&](std::vector<cd> rhs) {
      std::vector<double> c(n);
      std::vector<cd> x(n);
      c[0] = 1.0 / diag[0];
      x[0] = rhs[0] / diag[0];
      for (int i = 1; i < n; ++i) {
        const double m = diag[i] - c[i - 1];
        c[i] = 1.0 / m;
        x[i] = (rhs[i] - x[i - 1]) / m;
      }
      for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
      return x;
    };
    std::vector<cd> u(n, cd(0.0));
    u[0] = gamma;
    u[n - 1] = 1.0;
    const std::vector<cd> x = thomas(d);
    const std::vector<cd> z = thomas(u);
    const cd num = x[0] + x[n - 1] / gamma;
    const cd den = 1.0 + z[0] + z[n - 1] / gamma;
    M_.resize(n);
    for (int i = 0; i < n; ++i) M_[i] = x[i] - z[i] * num / den;
  }

  std::vector<cd> y_;
  std::vector<cd> M_;
  int N_ = 0;
  double h_ = 1.0;
};

}  // namespace

SphericalProfile::SphericalProfile(Fn fn, int rows, int cols)
    : fn_(std::move(fn)), rows_(rows), cols_(cols) {
  if (rows_ < 1 || cols_ < 1)
    throw ValidationError("SphericalProfile: dimensions must be positive");
}

SphericalProfile SphericalProfile::constant(std::complex<double> value) {
  return SphericalProfile(
      [value](const Eigen::VectorXd&) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = value;
        return m;
      },
      1, 1);
}

SphericalProfile SphericalProfile::tabulated(
    const PolarSystem& sys, int rows, int cols,
    const std::vector<std::vector<std::complex<double>>>& values_per_angle) {
  if (sys.dim() != 2)
    throw ValidationError("tabulated profiles require m = 2");
  const int N = static_cast<int>(values_per_angle.size());
  if (N < 4)
    throw ValidationError("tabulated profile needs at least 4 angles");
  for (const auto& row : values_per_angle)
    if (static_cast<int>(row.size()) != rows * cols)
      throw ValidationError(
          "tabulated profile row length must equal rows*cols");

  struct Table {
    PolarSystem sys;
    SphereParametrization sphere;
    std::vector<PeriodicSpline> entries;
    std::vector<double> phi;  // unwrapped Euclidean angle of theta(s_i)
    double h = 0.0;
    int N = 0;

    explicit Table(const PolarSystem& s) : sys(s), sphere(sys) {}

    double invert_angle(double target) const {
      // phi is increasing with phi[i+1] - phi[i] in (0, 2 pi); locate the
      // bracket, then refine with secant on the exact parametrization.
      double t = target;
      while (t < phi.front()) t += 2.0 * M_PI;
      while (t >= phi.front() + 2.0 * M_PI) t -= 2.0 * M_PI;
      int lo = 0, hi = N;  // phi[N] = phi[0] + 2 pi implicitly
      auto phi_at = [&](int i) {
        return i < N ? phi[i] : phi[0] + 2.0 * M_PI;
      };
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (phi_at(mid) <= t)
          lo = mid;
        else
          hi = mid;
      }
      double s0 = lo * h;
      double s1 = (lo + 1) * h;
      double f0 = phi_at(lo) - t;
      double f1 = phi_at(lo + 1) - t;
      for (int it = 0; it < 3; ++it) {
        if (std::abs(f1 - f0) < 1e-15) break;
        const double s = s1 - f1 * (s1 - s0) / (f1 - f0);
        const Eigen::Vector2d th = sphere.theta(s);
        double f = std::atan2(th[1], th[0]) - t;
        // keep the residual on the same branch as the bracket
        while (f > M_PI) f -= 2.0 * M_PI;
        while (f < -M_PI) f += 2.0 * M_PI;
        s0 = s1;
        f0 = f1;
        s1 = s;
        f1 = f;
        if (std::abs(f) < 1e-12) break;
      }
      return s1;
    }
  };

  auto tab = std::make_shared<Table>(sys);
  tab->N = N;
  tab->h = 2.0 * M_PI / N;
  tab->phi.resize(N);
  double prev = 0.0;
  for (int i = 0; i < N; ++i) {
    const Eigen::Vector2d th = tab->sphere.theta(i * tab->h);
    double a = std::atan2(th[1], th[0]);
    if (i == 0) {
      prev = a;
    } else {
      while (a <= prev) a += 2.0 * M_PI;
      if (a - prev >= 2.0 * M_PI)
        throw NumericalError(
            "tabulated profile: sphere angle map is not monotone");
    }
    tab->phi[i] = a;
    prev = a;
  }

  tab->entries.reserve(rows * cols);
  for (int e = 0; e < rows * cols; ++e) {
    std::vector<cd> y(N);
    for (int i = 0; i < N; ++i) y[i] = values_per_angle[i][e];
    tab->entries.emplace_back(std::move(y), 2.0 * M_PI);
  }

  auto fn = [tab, rows, cols](const Eigen::VectorXd& theta) {
    const double s = tab->invert_angle(std::atan2(theta[1], theta[0]));
    Eigen::MatrixXcd out(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        out(i, j) = tab->entries[i * cols + j].eval(s);
    return out;
  };
  return SphericalProfile(std::move(fn), rows, cols);
}

double profile_sup_norm(const SphericalProfile& profile,
                        const PolarSystem& sys, int samples) {
  double sup = 0.0;
  if (sys.dim() == 2) {
    const SphereParametrization sphere(sys);
    std::vector<double> angles;
    angles.reserve(samples + 48);
    for (int i = 0; i < samples; ++i)
      angles.push_back((i + 0.5) * 2.0 * M_PI / samples);
    // Profiles of homogeneous filters blow up, if anywhere, along the
    // distinguished directions; probe close to them.
    for (double a : eigendirection_angles(sys.generator()))
      for (double off : {1e-3, 1e-6, 1e-9}) {
        angles.push_back(a + off);
        angles.push_back(a - off);
      }
    for (double s : angles) {
      const double v = profile.eval(sphere.theta(s)).norm();
      if (!std::isfinite(v)) return INFINITY;
      sup = std::max(sup, v);
    }
    return sup;
  }
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> n01;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd x(sys.dim());
    for (int k = 0; k < sys.dim(); ++k) x[k] = n01(rng);
    if (x.norm() < 1e-8) continue;
    const double v = profile.eval(sys.direction(x)).norm();
    if (!std::isfinite(v)) return INFINITY;
    sup = std::max(sup, v);
  }
  return sup;
}

double profile_reality_defect(const SphericalProfile& profile,
                              const PolarSystem& sys, int samples) {
  if (sys.dim() != 2)
    throw ValidationError("profile_reality_defect: m = 2 only");
  const SphereParametrization sphere(sys);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = (i + 0.5) * 2.0 * M_PI / samples;
    const Eigen::Vector2d th = sphere.theta(s);
    const Eigen::MatrixXcd a = profile.eval(th);
    const Eigen::MatrixXcd b = profile.eval(Eigen::Vector2d(-th));
    worst = std::max(worst, (b - a.conjugate()).norm());
  }
  return worst;
}

HomogeneousFn::HomogeneousFn(PolarSystem generator_system,
                             Eigen::MatrixXd left_exponent,
                             std::optional<Eigen::MatrixXd> right_exponent,
                             SphericalProfile profile, Homogeneity kind)
    : sys_(std::move(generator_system)),
      left_(std::move(left_exponent)),
      right_(std::move(right_exponent)),
      profile_(std::move(profile)),
      kind_(kind) {
  if (left_.rows() != left_.cols())
    throw ValidationError("HomogeneousFn: left exponent must be square");
  if (left_.rows() != profile_.rows())
    throw ValidationError(
        "HomogeneousFn: left exponent and profile rows must agree");
  if (kind_ == Homogeneity::two_sided) {
    if (profile_.rows() != profile_.cols())
      throw ValidationError(
          "HomogeneousFn: two-sided functions must be square-valued");
    if (right_ && (right_->rows() != profile_.cols() ||
                   right_->cols() != profile_.cols()))
      throw ValidationError("HomogeneousFn: right exponent dimension");
  }
}

Eigen::MatrixXcd HomogeneousFn::eval(const Eigen::VectorXd& x) const {
  if (!x.allFinite()) throw ValidationError("HomogeneousFn: non-finite x");
  if (x.norm() == 0.0)
    throw DomainError(
        "HomogeneousFn: homogeneous functions are defined on R^m minus the "
        "origin");
  const PolarDecomposition d = sys_.decompose(x);
  return eval_polar(d.tau, d.l);
}

Eigen::MatrixXcd HomogeneousFn::eval_polar(double tau,
                                           const Eigen::VectorXd& l) const {
  const Eigen::MatrixXcd P = profile_.eval(l);
  if (kind_ == Homogeneity::left) return matrix_power(left_, tau) * P;
  const Eigen::MatrixXd L = matrix_power(0.5 * left_, tau);
  const Eigen::MatrixXd R =
      right_ ? matrix_power(0.5 * right_->transpose(), tau) : L.transpose();
  return L * P * R;
}

HomogeneousFn extend_from_sphere(const PolarSystem& generator_system,
                                 const Eigen::MatrixXd& left_exponent,
                                 const SphericalProfile& profile,
                                 Homogeneity kind,
                                 std::optional<Eigen::MatrixXd> right_exponent) {
  return HomogeneousFn(generator_system, left_exponent,
                       std::move(right_exponent), profile, kind);
}

HomogeneityReport check_homogeneity(
    const std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>& f,
    const PolarSystem& generator_system, const Eigen::MatrixXd& left_exponent,
    Homogeneity kind, int samples, double tol, std::uint64_t seed,
    double c_min, double c_max) {
  if (samples < 1)
    throw ValidationError("check_homogeneity: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  std::uniform_real_distribution<double> ulc(std::log(c_min), std::log(c_max));
  const int m = generator_system.dim();
  HomogeneityReport rep;
  rep.worst_x = Eigen::VectorXd::Zero(m);
  int done = 0;
  while (done < samples) {
    Eigen::VectorXd x(m);
    for (int k = 0; k < m; ++k) x[k] = ux(rng);
    if (x.norm() < 0.3) continue;
    ++done;
    const double c = std::exp(ulc(rng));
    const Eigen::VectorXd xc = generator_system.power(c) * x;
    const Eigen::MatrixXcd lhs = f(xc);
    Eigen::MatrixXcd rhs;
    if (kind == Homogeneity::left) {
      rhs = matrix_power(left_exponent, c) * f(x);
    } else {
      const Eigen::MatrixXd L = matrix_power(0.5 * left_exponent, c);
      rhs = L * f(x) * L.transpose();
    }
    const double rel =
        (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (rel > rep.max_rel_violation) {
      rep.max_rel_violation = rel;
      rep.worst_c = c;
      rep.worst_x = x;
    }
  }
  rep.pass = rep.max_rel_violation <= tol;
  return rep;
}

HomogeneityReport check_homogeneity(const HomogeneousFn& f, int samples,
                                    double tol, std::uint64_t seed,
                                    double c_min, double c_max) {
  return check_homogeneity(
      [&f](const Eigen::VectorXd& x) { return f.eval(x); }, f.system(),
      f.left_exponent(), f.kind(), samples, tol, seed, c_min, c_max);
}

}  // namespace ofbf
