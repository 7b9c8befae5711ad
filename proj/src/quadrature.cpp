#include "ofbf/quadrature.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

namespace ofbf {

namespace {
std::atomic<int> g_threads{0};  // 0 = use hardware concurrency
}

int thread_count() {
  int t = g_threads.load();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}

void set_thread_count(int n) { g_threads.store(n); }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const int workers =
      static_cast<int>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace quad {

namespace {

GaussRule make_rule(int n) {
  // Newton iteration on P_n with the Chebyshev initial guess.
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

double aitken_limit(std::span<const double> s) {
  std::vector<double> cur(s.begin(), s.end());
  while (cur.size() >= 3) {
    std::vector<double> next;
    next.reserve(cur.size() - 2);
    for (std::size_t i = 0; i + 2 < cur.size(); ++i) {
      const double d1 = cur[i + 1] - cur[i];
      const double d2 = cur[i + 2] - cur[i + 1];
      const double den = d2 - d1;
      if (std::abs(den) < 1e-300 * (std::abs(d1) + std::abs(d2)) ||
          den == 0.0) {
        next.push_back(cur[i + 2]);
      } else {
        next.push_back(cur[i + 2] - d2 * d2 / den);
      }
    }
    cur = std::move(next);
  }
  return cur.back();
}

}  // namespace quad
}  // namespace ofbf
