// One-dimensional quadrature building blocks used across the library:
// Gauss-Legendre panels, adaptive bisection, geometric panels for decaying
// integrands on [a, inf), alternating-panel evaluation of oscillatory tails
// with Aitken extrapolation, and order-stable reductions.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ofbf/errors.hpp"

namespace ofbf {

// Worker cap for the parallel helpers. Results do not depend on the setting:
// node values are materialized and reduced pairwise in index order.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
// possibly on different threads.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Pairwise (cascade) summation; deterministic for a fixed ordering.
double pairwise_sum(std::span<const double> v);

namespace quad {

struct GaussRule {
  Eigen::ArrayXd nodes;    // on (-1, 1)
  Eigen::ArrayXd weights;
};

// Cached Gauss-Legendre rule of the given order.
const GaussRule& gauss_legendre(int n);

template <class F>
double gauss_panel(F&& f, double a, double b, int n = 16) {
  const GaussRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * acc;
}

struct AdaptiveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int points = 16;
  int max_depth = 20;
};

namespace detail {
template <class F>
double adapt_rec(F& f, double a, double b, double whole,
                 const AdaptiveOptions& opt, double scale, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid, opt.points);
  const double right = gauss_panel(f, mid, b, opt.points);
  const double err = std::abs(left + right - whole);
  if (err <= opt.rel_tol * scale + opt.abs_tol || depth >= opt.max_depth)
    return left + right;
  const double s = std::max(scale, std::abs(left) + std::abs(right));
  return adapt_rec(f, a, mid, left, opt, s, depth + 1) +
         adapt_rec(f, mid, b, right, opt, s, depth + 1);
}
}  // namespace detail

// Adaptive bisection on [a, b] with a fixed-order Gauss panel per node.
template <class F>
double integrate_adaptive(F&& f, double a, double b,
                          AdaptiveOptions opt = {}) {
  const double whole = gauss_panel(f, a, b, opt.points);
  return detail::adapt_rec(f, a, b, whole,
                           opt, std::abs(whole), 0);
}

// Integral over [a, inf) of an eventually-decaying integrand, by geometric
// panels [a, a+w], [a+w, a+3w], ... (widths doubling). Terminates once two
// consecutive panels are negligible against the accumulated value; the
// observed panel ratio supplies a geometric tail estimate.
template <class F>
double integrate_decay(F&& f, double a, double rel_tol = 1e-13,
                       double width0 = 1.0, int max_panels = 200) {
  double lo = a;
  double w = width0;
  double total = 0.0;
  double prev_panel = 0.0;
  int quiet = 0;
  for (int k = 0; k < max_panels; ++k) {
    const double panel = gauss_panel(f, lo, lo + w, 16) +
                         gauss_panel(f, lo + w, lo + 2.0 * w, 16);
    total += panel;
    const double scale = std::max(std::abs(total), 1e-300);
    if (std::abs(panel) <= rel_tol * scale) {
      if (++quiet >= 2) return total;
    } else {
      quiet = 0;
    }
    if (k > 0 && std::abs(panel) < std::abs(prev_panel)) {
      const double r = std::abs(panel) / std::abs(prev_panel);
      if (r < 0.9 && std::abs(panel) * r / (1.0 - r) <= rel_tol * scale &&
          quiet >= 1)
        return total + panel * r / (1.0 - r);
    }
    prev_panel = panel;
    lo += 2.0 * w;
    w *= 2.0;
  }
  throw NumericalError("integrate_decay: no convergence after max panels");
}

// Aitken delta-squared extrapolation of a sequence of partial sums.
double aitken_limit(std::span<const double> partial_sums);

// Integral over [a, inf) of f(y) * cos(omega * y + phase) for a smooth
// integrable envelope f. Panels run between consecutive zeros of the
// oscillation; the alternating partial sums are accelerated with Aitken.
template <class F>
double integrate_oscillatory_tail(F&& f, double a, double omega, double phase,
                                  double rel_tol = 1e-11,
                                  int max_half_periods = 20000) {
  if (omega < 0.0) {
    omega = -omega;
    phase = -phase;
  }
  if (omega < 1e-14)
    return std::cos(phase) *
           integrate_decay(f, a, rel_tol, 1.0 + std::abs(a));
  auto g = [&](double y) { return f(y) * std::cos(omega * y + phase); };
  // First zero of cos(omega*y + phase) at or after a.
  const double k0 = std::ceil((omega * a + phase) / M_PI - 0.5);
  double z = ((k0 + 0.5) * M_PI - phase) / omega;
  double total = z > a ? gauss_panel(g, a, z, 16) : 0.0;
  if (z < a) z = a;

  std::vector<double> partial;
  partial.reserve(64);
  const double half_period = M_PI / omega;
  double best = total;
  for (int k = 0; k < max_half_periods; ++k) {
    total += gauss_panel(g, z, z + half_period, 12);
    z += half_period;
    partial.push_back(total);
    if (partial.size() >= 6 && (partial.size() % 2 == 0)) {
      const double lim = aitken_limit(partial);
      const double scale = std::max({std::abs(lim), std::abs(total), 1e-300});
      if (std::abs(lim - best) <= rel_tol * scale) return lim;
      best = lim;
    }
  }
  throw NumericalError(
      "integrate_oscillatory_tail: Aitken acceleration did not settle");
}

}  // namespace quad
}  // namespace ofbf
