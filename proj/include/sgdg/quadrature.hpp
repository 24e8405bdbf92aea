#pragma once

// Patchwise quadrature of integrands against sparse-grid basis functions.
//
// A basis function with level l is smooth on each of the 2^{#(l_m >= 1)}
// boxes obtained by halving its support in every coordinate with l_m >= 1.
// Each box ("patch") gets its own rule: either a tensor Gauss rule or a
// Smolyak combination of Gauss rules with 2^q + 1 points at level q.

#include <functional>
#include <span>
#include <vector>

#include "sgdg/basis1d.hpp"
#include "sgdg/sparse_space.hpp"

namespace sgdg {

using ScalarField = std::function<double(std::span<const double>)>;

struct QuadConfig {
  enum class Mode { TensorPerPatch, SmolyakPerPatch };

  int iquad = 7;
  /// Points per coordinate in tensor mode; 0 means k + 2.
  int points_per_cell = 0;
  Mode mode = Mode::SmolyakPerPatch;
};

/// Rule on [0,1]^dim.  points holds size()*dim coordinates, point-major.
struct QuadRuleND {
  int dim = 0;
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
  std::span<const double> point(int q) const { return {points.data() + q * dim, static_cast<std::size_t>(dim)}; }
};

/// Per-patch Smolyak level for a basis function with |l|_1 = level_l1:
/// max(1, ceil(iquad - level_l1 / 2)).
int smolyak_level(int iquad, int level_l1);

/// m points per coordinate.
QuadRuleND tensor_rule(int dim, int m);

/// Smolyak combination of Gauss rules, 1D level q using 2^q + 1 points.
/// Coincident nodes are merged.  Cached; dim = 0 yields the unit point rule.
const QuadRuleND& smolyak_rule(int dim, int level);

/// Patch boxes of a basis function with the given level and cell indices.
std::vector<std::vector<Interval>> basis_patches(const MultiIndex& level, const MultiIndex& cell);

/// Integrals of f against every polynomial index in `polys` of the element
/// (level, cell).  Throws IntegrationError on a non-finite sample.
std::vector<double> integrate_against_element(const ScalarField& f, const MultiIndex& level,
                                              const MultiIndex& cell, const std::vector<MultiIndex>& polys,
                                              const Basis1D& basis, const QuadConfig& cfg);

/// Integral of f times the basis function b over [0,1]^d.
double integrate_against_basis(const ScalarField& f, const BasisId& b, const Basis1D& basis,
                               const QuadConfig& cfg);

/// One of the 2d faces: {x_coord = side}.
struct Face {
  int coord = 0;
  int side = 0;  ///< 0 or 1
};

/// Boundary part of the load functional for one face and a list of
/// polynomial indices of one element:
///   int_face (K grad v . n + penalty * v) g ds,
/// with penalty = sigma / h.  Patches are those of the tangential
/// coordinates, with the same level rule as the volume integrals.
std::vector<double> integrate_boundary_element(const ScalarField& g, Face face, const MultiIndex& level,
                                               const MultiIndex& cell, const std::vector<MultiIndex>& polys,
                                               const Basis1D& basis, const ScalarField& kappa, double penalty,
                                               const QuadConfig& cfg);

double integrate_boundary(const ScalarField& g, Face face, const BasisId& b, const Basis1D& basis,
                          const ScalarField& kappa, double penalty, const QuadConfig& cfg);

/// Patch rule for the current configuration: Smolyak at level q or tensor
/// with the configured point count (degree k fixes the default).
const QuadRuleND& patch_rule(int dim, int level_l1, int degree, const QuadConfig& cfg);

}  // namespace sgdg
