#pragma once

// Evaluation of discrete functions, error norms and convergence orders.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sgdg/problem.hpp"
#include "sgdg/sparse_space.hpp"

namespace sgdg {

struct DiscreteFunction {
  const SpaceSpec* space = nullptr;
  std::vector<double> coeffs;

  DiscreteFunction(const SpaceSpec& s, std::vector<double> c);
};

/// Point evaluation touching one element per admissible level.
class Evaluator {
public:
  explicit Evaluator(const SpaceSpec& space);

  double value(std::span<const double> coeffs, std::span<const double> x, Side side = Side::Left) const;
  /// Value, with the gradient written to grad (size d).
  double value_grad(std::span<const double> coeffs, std::span<const double> x, std::span<double> grad,
                    Side side = Side::Left) const;

private:
  const SpaceSpec* space_;
  Basis1D basis_;
  std::vector<int> level_first_;  // first element of each entry of space.levels()
};

double eval_discrete(const DiscreteFunction& u, std::span<const double> x, Side side = Side::Left);
double eval_discrete_grad(const DiscreteFunction& u, std::span<const double> x, std::span<double> grad,
                          Side side = Side::Left);

/// Coefficients in the cell-orthonormal tensor Legendre basis of the finest
/// grid.  Entry index: sum_m (c_m (k+1) + q_m) M^{d-1-m} with M = 2^N (k+1),
/// cell c_m and Legendre degree q_m in coordinate m.
std::vector<double> full_grid_coefficients(const DiscreteFunction& u, int threads = 1);

/// sum c^2, equal to the squared L2 norm for orthonormal families.
double coefficient_norm_sq(std::span<const double> coeffs);

struct ErrorOptions {
  int points = 0;       ///< Gauss points per coordinate and finest cell; 0 means max(6, k + 3)
  bool energy = false;  ///< also compute the energy norm (face terms)
  int threads = 1;
};

struct ErrorReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;      ///< sqrt(l2^2 + h1_semi^2)
  double energy = 0.0;  ///< only with ErrorOptions::energy
  double energy_jump = 0.0;  ///< sqrt of the (1/h) int [e]^2 part
  int dim = 0;
  int max_level = 0;
  int degree = 0;
  std::int64_t dofs = 0;
};

/// Errors of u_h against `exact` on the finest grid.  L-infinity is the
/// maximum over the quadrature points and the cell centers.
ErrorReport error_norms(const DiscreteFunction& uh, const ScalarField& exact, const VectorField& exact_grad,
                        const ErrorOptions& opts = {});
/// Same norms for an exact solution given as a sum of products.
ErrorReport error_norms(const DiscreteFunction& uh, const std::vector<SeparableProduct>& exact,
                        const ErrorOptions& opts = {});
/// Uses prob.exact_separable when present, else the pointwise fields.
ErrorReport error_norms(const DiscreteFunction& uh, const Problem& prob, const ErrorOptions& opts = {});

/// order_i = log2(e_{i-1} / e_i); empty for the first entry and when an error is zero.
std::vector<std::optional<double>> convergence_orders(std::span<const double> errors);

}  // namespace sgdg
