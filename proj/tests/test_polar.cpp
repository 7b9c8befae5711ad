#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ofbf/polar.hpp"
#include "ofbf/quadrature.hpp"

using namespace ofbf;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MatrixXd diag2(double a, double b) {
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = a;
  D(1, 1) = b;
  return D;
}

VectorXd vec2(double x, double y) {
  VectorXd v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("zero_norm reduces to the Euclidean norm for E = I", "[polar]") {
  PolarSystem sys(MatrixXd::Identity(2, 2));
  CHECK(sys.zero_norm(vec2(3, 4)) == Catch::Approx(5.0).epsilon(1e-10));
  CHECK(sys.zero_norm(vec2(0, 0)) == 0.0);
}

TEST_CASE("zero_norm axis closed form for diagonal generators", "[polar]") {
  // For x = (x1, 0): ||x||_0 = int_0^1 t^{a-1} |x1| dt = |x1| / a.
  const double a = 0.7, b = 1.6;
  PolarSystem sys(diag2(a, b));
  CHECK(sys.zero_norm(vec2(2.5, 0)) == Catch::Approx(2.5 / a).epsilon(1e-10));
  CHECK(sys.zero_norm(vec2(0, -3.0)) == Catch::Approx(3.0 / b).epsilon(1e-10));
}

TEST_CASE("PolarSystem rejects generators without positive spectrum",
          "[polar]") {
  CHECK_THROWS_AS(PolarSystem(diag2(-0.5, 1.0)), ValidationError);
  CHECK_THROWS_AS(PolarSystem(diag2(0.0, 1.0)), ValidationError);
}

TEST_CASE("tau closed forms and domain errors", "[polar]") {
  PolarSystem iso(MatrixXd::Identity(2, 2));
  CHECK(iso.tau(vec2(3, 4)) == Catch::Approx(5.0).epsilon(1e-9));

  const double a = 0.8;
  PolarSystem sys(diag2(a, 1.3));
  // Solve tau^{-a} |x1| / a = 1 on the first axis.
  const double x1 = 2.0;
  CHECK(sys.tau(vec2(x1, 0)) ==
        Catch::Approx(std::pow(x1 / a, 1.0 / a)).epsilon(1e-9));

  CHECK_THROWS_AS(sys.tau(vec2(0, 0)), DomainError);
}

TEST_CASE("tau and direction obey the operator scaling identities",
          "[polar]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  std::uniform_real_distribution<double> uc(0.1, 10.0);
  MatrixXd E(2, 2);
  E << 0.9, 0.3, 0.0, 1.4;
  PolarSystem sys(E);
  for (int t = 0; t < 25; ++t) {
    VectorXd x = vec2(ux(rng), ux(rng));
    if (x.norm() < 1e-3) continue;
    const double c = uc(rng);
    const double t1 = sys.tau(x);
    const VectorXd xc = matrix_power(E, c) * x;
    CHECK(sys.tau(xc) == Catch::Approx(c * t1).epsilon(1e-8));
    const VectorXd l1 = sys.direction(x);
    const VectorXd l2 = sys.direction(xc);
    CHECK((l1 - l2).norm() < 1e-8);
  }
}

TEST_CASE("polar decomposition round trip and axis case", "[polar]") {
  PolarSystem iso(MatrixXd::Identity(2, 2));
  PolarDecomposition d = iso.decompose(vec2(0, 2));
  CHECK(d.tau == Catch::Approx(2.0).epsilon(1e-9));
  CHECK(d.l[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(d.l[1] == Catch::Approx(1.0).epsilon(1e-9));

  const double a = 0.6;
  PolarSystem sys(diag2(a, 1.1));
  d = sys.decompose(vec2(1.7, 0));
  // Direction lands on (a, 0): the axis point of S_0, ||(a,0)||_0 = 1.
  CHECK(d.l[0] == Catch::Approx(a).epsilon(1e-8));
  CHECK(d.l[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(sys.zero_norm(d.l) == Catch::Approx(1.0).epsilon(1e-8));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = vec2(ux(rng), ux(rng));
    if (x.norm() < 1e-3) continue;
    PolarDecomposition p = sys.decompose(x);
    const VectorXd back = matrix_power(sys.generator(), p.tau) * p.l;
    CHECK((back - x).norm() <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("zero_norm is strictly increasing along operator rays", "[polar]") {
  MatrixXd E(2, 2);
  E << 1.2, -0.4, 0.2, 0.7;
  PolarSystem sys(E);
  const VectorXd x = vec2(0.8, -1.1);
  double prev = 0.0;
  for (double r = 0.25; r <= 4.0; r *= 1.3) {
    const double n = sys.zero_norm(matrix_power(E, r) * x);
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("radial bounds report and two-sample envelope", "[polar]") {
  SECTION("identity generator, small regime") {
    PolarSystem sys(MatrixXd::Identity(2, 2));
    RadialBoundsReport r = sys.radial_bounds_check(vec2(0.3, 0), 0.1);
    CHECK(r.regime == RadialBoundsReport::Regime::small_ball);
    CHECK(r.tau == Catch::Approx(0.3).epsilon(1e-8));
    // tau lies between the sandwich powers up to the fitted constants;
    // for E = I the ratios are ||x||^{+-delta/(1+-delta)}.
    CHECK(r.ratio_lo ==
          Catch::Approx(std::pow(0.3, 0.1 / 1.1)).epsilon(1e-6));
    CHECK(r.ratio_hi ==
          Catch::Approx(std::pow(0.3, -0.1 / 0.9)).epsilon(1e-6));
  }

  SECTION("anisotropic generator, large regime, constants fitted") {
    PolarSystem sys(diag2(0.5, 1.5));
    const double delta = 0.1;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> urad(2.0, 40.0);
    double c4 = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double s = uang(rng);
      VectorXd x = urad(rng) * vec2(std::cos(s), std::sin(s));
      RadialBoundsReport r = sys.radial_bounds_check(x, delta);
      REQUIRE(r.regime == RadialBoundsReport::Regime::large_ball);
      CHECK(r.sandwich_lo <= r.sandwich_hi);
      c4 = std::max(c4, r.ratio_hi);
    }
    // Fresh sample, farther out; the fitted constant (with slack) still
    // dominates tau / ||x||^{1/(e_min+delta)}.
    for (int t = 0; t < 100; ++t) {
      const double s = uang(rng);
      VectorXd x = (40.0 + urad(rng)) * vec2(std::cos(s), std::sin(s));
      RadialBoundsReport r = sys.radial_bounds_check(x, delta);
      REQUIRE(r.regime == RadialBoundsReport::Regime::large_ball);
      CHECK(r.tau <= 1.5 * c4 * r.sandwich_hi);
    }
  }

  SECTION("boundary point") {
    PolarSystem sys(diag2(0.7, 1.2));
    const VectorXd l = sys.direction(vec2(1.3, -0.4));
    RadialBoundsReport r = sys.radial_bounds_check(l, 0.2);
    CHECK(r.regime == RadialBoundsReport::Regime::boundary);
    CHECK(r.tau == Catch::Approx(1.0).epsilon(1e-7));
  }

  SECTION("delta validation") {
    PolarSystem sys(diag2(0.5, 1.5));
    CHECK_THROWS_AS(sys.radial_bounds_check(vec2(1, 1), 0.6), DomainError);
    CHECK_THROWS_AS(sys.radial_bounds_check(vec2(1, 1), 0.0), DomainError);
  }
}

TEST_CASE("sphere parametrization for the identity generator", "[polar]") {
  PolarSystem sys(MatrixXd::Identity(2, 2));
  SphereParametrization sphere(sys);
  for (double s : {0.3, 1.7, 4.4}) {
    const Vector2d th = sphere.theta(s);
    CHECK(th[0] == Catch::Approx(std::cos(s)).margin(1e-9));
    CHECK(th[1] == Catch::Approx(std::sin(s)).margin(1e-9));
    CHECK(sphere.density(s) == Catch::Approx(1.0).epsilon(1e-7));
  }
  // total spherical mass = arc length 2 pi
  double mass = 0.0;
  const int n = 64;
  for (int i = 0; i < n; ++i)
    mass += sphere.density((i + 0.5) * 2.0 * M_PI / n) * 2.0 * M_PI / n;
  CHECK(mass == Catch::Approx(2.0 * M_PI).epsilon(1e-7));
}

TEST_CASE("spherical measure is finite and positive for anisotropic "
          "generators", "[polar]") {
  PolarSystem sys(diag2(0.8, 1.2));
  SphereParametrization sphere(sys);
  double mass = 0.0;
  const int n = 128;
  for (int i = 0; i < n; ++i) {
    const double d = sphere.density((i + 0.5) * 2.0 * M_PI / n);
    CHECK(d >= 0.0);
    CHECK(std::isfinite(d));
    mass += d * 2.0 * M_PI / n;
  }
  CHECK(mass > 0.0);
  CHECK(std::isfinite(mass));
}

TEST_CASE("polar change of variables reproduces the Gaussian integral",
          "[polar]") {
  auto gauss = [](const VectorXd& x) { return std::exp(-x.squaredNorm()); };
  PolarQuadratureOptions opt;
  opt.r_min = 1e-6;
  opt.r_max = 1e3;
  opt.radial_nodes = 256;
  opt.angular_nodes = 32;

  for (const MatrixXd& E :
       {MatrixXd(MatrixXd::Identity(2, 2)), MatrixXd(diag2(0.8, 1.2))}) {
    PolarSystem sys(E);
    QuadratureResult r = polar_integrate(sys, gauss, opt);
    CHECK(r.value == Catch::Approx(M_PI).epsilon(1e-4));
  }
}

TEST_CASE("polar quadrature agrees with Cartesian tensor quadrature",
          "[polar]") {
  // Smooth anisotropic integrand; oracle by iterated adaptive quadrature
  // over [-8, 8]^2.
  auto h = [](const VectorXd& x) {
    return std::exp(-x.squaredNorm()) * (1.0 + 0.5 * x[0] * x[0]);
  };
  const double oracle = cartesian_integrate(h, 2, -8.0, 8.0, 1e-9);
  PolarSystem sys(diag2(0.8, 1.2));
  PolarQuadratureOptions opt;
  opt.r_min = 1e-6;
  opt.r_max = 1e3;
  opt.radial_nodes = 256;
  opt.angular_nodes = 32;
  QuadratureResult r = polar_integrate(sys, h, opt);
  CHECK(r.value == Catch::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("unit-radius ball volume equals spherical mass over trace",
          "[polar]") {
  PolarSystem sys(diag2(0.7, 1.4));
  SphereParametrization sphere(sys);
  double mass = 0.0;
  const int n = 256;
  for (int i = 0; i < n; ++i)
    mass += sphere.density((i + 0.5) * 2.0 * M_PI / n) * 2.0 * M_PI / n;
  const double predicted = mass / sys.trace();

  // The indicator is radial in polar coordinates; a symmetric log-radial
  // range puts the jump on a panel boundary.
  auto ball = [&](const VectorXd& x) {
    return x.norm() > 0 && sys.zero_norm(x) <= 1.0 ? 1.0 : 0.0;
  };
  PolarQuadratureOptions opt;
  opt.r_min = 1e-4;
  opt.r_max = 1e4;
  opt.radial_nodes = 256;
  opt.angular_nodes = 64;
  QuadratureResult r = polar_integrate(sys, ball, opt);
  CHECK(r.value == Catch::Approx(predicted).epsilon(1e-5));

  // Cartesian Monte Carlo oracle for the same volume.
  std::mt19937_64 rng(99);
  const double L = 3.0;
  std::uniform_real_distribution<double> u(-L, L);
  const int N = 20000;
  int inside = 0;
  for (int i = 0; i < N; ++i) {
    VectorXd x = vec2(u(rng), u(rng));
    if (x.norm() > 0 && sys.zero_norm(x) <= 1.0) ++inside;
  }
  const double p = static_cast<double>(inside) / N;
  const double mc = p * 4.0 * L * L;
  const double se = 4.0 * L * L * std::sqrt(p * (1.0 - p) / N);
  CHECK(std::abs(r.value - mc) <= 3.5 * se);
}

TEST_CASE("cartesian fallback handles m = 3", "[polar]") {
  PolarSystem sys(MatrixXd::Identity(3, 3));
  auto gauss = [](const VectorXd& x) { return std::exp(-x.squaredNorm()); };
  PolarQuadratureOptions opt;
  opt.r_max = 7.0;
  opt.rel_tol = 1e-7;
  QuadratureResult r = polar_integrate(sys, gauss, opt);
  CHECK(r.value == Catch::Approx(std::pow(M_PI, 1.5)).epsilon(1e-5));
}
