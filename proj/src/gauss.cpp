#include "sgdg/gauss.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sgdg/error.hpp"

namespace sgdg {

namespace {

// Newton iteration on P_m starting from the Chebyshev-like guess.
QuadRule1D compute_gauss(int m) {
  QuadRule1D rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= m; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= m; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // node on [-1,1] is +-x; map to [0,1]
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[m - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[m - 1 - i] = 0.5 * w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.5;
  return rule;
}

}  // namespace

QuadRule1D gauss_rule(int m) {
  if (m < 1 || m > 30) throw ConfigError("gauss_rule: point count must be in 1..30");
  return gauss_rule_cached(m);
}

const QuadRule1D& gauss_rule_cached(int m) {
  if (m < 1) throw ConfigError("gauss rule needs at least one point");
  static std::mutex mutex;
  static std::map<int, QuadRule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, compute_gauss(m)).first;
  return it->second;
}

}  // namespace sgdg
