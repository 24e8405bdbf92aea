#pragma once

#include <vector>

namespace sgdg {

/// Quadrature rule on [0,1].
struct QuadRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// m-point Gauss-Legendre rule mapped to [0,1]; 1 <= m <= 30.
QuadRule1D gauss_rule(int m);

/// Same as gauss_rule without the public size limit (used by Smolyak levels
/// that need 2^l + 1 points).  Rules are cached; the reference stays valid.
const QuadRule1D& gauss_rule_cached(int m);

}  // namespace sgdg
