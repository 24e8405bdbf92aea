#pragma once

// Elliptic model problems -div(K grad u) = f on [0,1]^d with u = g on the
// boundary.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgdg/operators1d.hpp"
#include "sgdg/quadrature.hpp"

namespace sgdg {

using VectorField = std::function<void(std::span<const double> x, std::span<double> grad)>;

/// coef * prod_m factors[m](x_m).
struct SeparableTerm {
  double coef = 1.0;
  std::vector<std::function<double(double)>> factors;
};

double eval_separable(const std::vector<SeparableTerm>& terms, std::span<const double> x);

/// coef * prod_m factors[m](x_m), with derivatives[m] the derivative of factors[m].
struct SeparableProduct {
  double coef = 1.0;
  std::vector<std::function<double(double)>> factors;
  std::vector<std::function<double(double)>> derivatives;
};

/// Scalar (or constant diagonal) diffusion coefficient.
struct Coefficient {
  enum class Kind { Constant, SeparableSum, General };

  Kind kind = Kind::Constant;
  /// Constant: diagonal entries K_mm (a scalar K repeats the value).
  std::vector<double> diagonal;
  /// SeparableSum: each term is a product of one-sided 1D factors.
  std::vector<std::vector<Weight1D>> terms;
  /// General: pointwise values.
  ScalarField general;

  static Coefficient constant(int dim, double value);
  static Coefficient constant_diagonal(std::vector<double> diag);
  static Coefficient separable(std::vector<std::vector<Weight1D>> terms);
  static Coefficient general_field(ScalarField k);

  /// Scalar value (Constant diagonal coefficients must be scalar here).
  double eval(std::span<const double> x) const;
};

struct Problem {
  std::string name;
  int dim = 2;
  Coefficient K;
  ScalarField f;
  std::optional<std::vector<SeparableTerm>> f_separable;
  ScalarField g;
  std::optional<std::vector<SeparableTerm>> g_separable;
  ScalarField exact;
  VectorField exact_grad;
  /// Optional sum of products equal to `exact`; lets error norms tabulate 1D factors.
  std::optional<std::vector<SeparableProduct>> exact_separable;

  bool has_exact() const { return static_cast<bool>(exact); }
  /// Validates field presence and dimension consistency; throws ConfigError.
  void validate() const;
};

std::vector<std::string> builtin_problem_names();
/// Throws ConfigError for an unknown name.
Problem builtin_problem(const std::string& name);

/// Default penalty for (d, k) used by the builtin studies.
double default_sigma(int dim, int degree);

/// max over pseudo-random samples of |-div(K grad u) - f|, with the
/// divergence taken by central differences of K grad u.  Samples within
/// `gap` of x_m = 1/2 are skipped when `avoid_half` is set.
double manufactured_residual(const Problem& prob, int samples, unsigned seed = 1, bool avoid_half = false);

/// Coefficients c of K_h = sum c * psi over the degree-`degree` orthonormal
/// hierarchical tensor basis of the sparse space of level `max_level`.
/// Entries below threshold * max|c| are set to zero.
struct CoefficientExpansion {
  int dim = 0;
  int max_level = 0;
  int degree = 0;
  SpaceSpec space;
  std::vector<double> coeffs;  ///< in space DOF order

  double eval(std::span<const double> x) const;
};

CoefficientExpansion project_coefficient(const ScalarField& k, int dim, int max_level, int degree,
                                         const QuadConfig& cfg = {}, double threshold = 1e-14);

}  // namespace sgdg
