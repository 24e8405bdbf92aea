#pragma once

// One-dimensional building blocks of the IPDG bilinear form.
//
// All operators act on the hierarchical functions of one family up to level
// N, numbered (element, poly) with element in 0 .. 2^N - 1 as in basis1d.
// Interface terms live on the 2^N - 1 interior points of the finest grid,
// jumps are (left limit - right limit), averages are half sums, and the
// boundary points use the one-sided trace with outward normal -1 at x = 0
// and +1 at x = 1.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgdg/basis1d.hpp"

namespace sgdg {

using DenseMatrix = Eigen::MatrixXd;

/// 1D weight with one-sided evaluation.  An empty function means the
/// constant `scale`, which lets mass operators of orthonormal families be
/// exact multiples of the identity.
struct Weight1D {
  std::function<double(double, Side)> fn;
  double scale = 1.0;
  /// Points in (0, 1) where fn may jump; quadrature splits cells there.
  std::vector<double> breaks;

  bool is_constant() const { return !fn; }
  double operator()(double x, Side side) const { return fn ? fn(x, side) : scale; }

  static Weight1D constant(double c);
  static Weight1D smooth(std::function<double(double)> f);
};

/// Number of hierarchical functions up to level N.
int hierarchy_size(int max_level, int degree);

/// Finest-grid cell c has exactly one element per level containing it; this
/// returns those element indices ordered by level 0 .. N.
std::vector<int> element_chain(int max_level, int cell);

DenseMatrix mass_1d(const Basis1D& basis, int max_level, const Weight1D& weight = {}, int points = 0);
DenseMatrix stiffness_1d(const Basis1D& basis, int max_level, const Weight1D& weight = {}, int points = 0);

struct FaceOperators1D {
  DenseMatrix flux;            ///< E[a,b] = sum_interior {w phi_a'} [phi_b]
  DenseMatrix jump;            ///< J[a,b] = sum_interior [phi_a] [phi_b]
  DenseMatrix boundary_left;   ///< flux closure at x = 0: -w phi_a'(0+) phi_b(0+)
  DenseMatrix boundary_right;  ///< flux closure at x = 1: +w phi_a'(1-) phi_b(1-)
  DenseMatrix boundary_jump;   ///< phi_a(0+) phi_b(0+) + phi_a(1-) phi_b(1-)

  DenseMatrix flux_total() const { return flux + boundary_left + boundary_right; }
  DenseMatrix jump_total() const { return jump + boundary_jump; }
};

FaceOperators1D face_operators_1d(const Basis1D& basis, int max_level, const Weight1D& weight = {});

/// L2 projection of w onto the full 1D space of degree `degree` up to level
/// N, as coefficients of the orthonormal hierarchical basis.
std::vector<double> project_weight(const std::function<double(double)>& w, int max_level, int degree,
                                   int points = 0);

/// Evaluates a hierarchical expansion (orthonormal family, given degree).
double eval_expansion(std::span<const double> coeffs, int max_level, int degree, double x,
                      Side side = Side::Left);

/// Element-pair data used by the d-dimensional assembly.  Blocks are
/// (k+1) x (k+1), row-major in (poly of a, poly of b).
class PairTables1D {
public:
  struct FacePoint {
    int point = 0;  ///< finest-grid point index, x = point * 2^-N
    int side = 0;   ///< 0: left limit, 1: right limit
    double weight = 0.5;
    std::vector<double> alpha;  ///< w_s (a'(x^s) [b] + b'(x^s) [a])
  };

  PairTables1D(const Basis1D& basis, int max_level);

  int max_level() const { return n_; }
  int elements() const { return 1 << n_; }
  int per_element() const { return k1_; }

  /// Supports overlap in a set of positive measure.
  bool overlap(int a, int b) const;
  /// Elements b with nonzero face or overlap coupling to a.
  const std::vector<int>& coupled(int a) const { return coupled_[a]; }
  /// Elements b whose supports overlap a's.
  const std::vector<int>& overlapping(int a) const { return overlapping_[a]; }

  const std::vector<FacePoint>& face_points(int a, int b) const { return faces_[a * elements() + b]; }
  /// Interior plus boundary jump-jump block, or nullptr when zero.
  const double* jump(int a, int b) const;
  /// Unweighted mass block, or nullptr when zero.
  const double* mass(int a, int b) const;

  /// Finest-grid point and one-sided location.
  double point_x(int point) const { return std::ldexp(static_cast<double>(point), -n_); }

private:
  int n_;
  int k1_;
  std::vector<std::vector<int>> coupled_;
  std::vector<std::vector<int>> overlapping_;
  std::vector<std::vector<FacePoint>> faces_;
  std::vector<std::vector<double>> jump_;
  std::vector<std::vector<double>> mass_;
};

/// Weighted mass and stiffness blocks for a family of 1D weights.  Each
/// weight id carries P sub-functions (P = 1 for plain functions, P = 2k'+1
/// for the elements of a hierarchical expansion of degree k').
class WeightTables1D {
public:
  struct Entry {
    int id = 0;
    int level = 0;
    const double* mass = nullptr;       ///< P x (k+1)^2
    const double* stiffness = nullptr;  ///< P x (k+1)^2
  };

  /// Family of explicit weight functions, ids 0 .. weights.size()-1.
  static WeightTables1D from_functions(const Basis1D& basis, int max_level, const std::vector<Weight1D>& weights,
                                       int points);
  /// Family of all elements of the orthonormal degree-`degree` hierarchy up
  /// to level N (ids are element indices).  Entries with weight level above
  /// both basis levels vanish by orthogonality and are omitted.
  static WeightTables1D from_hierarchy(const Basis1D& basis, int max_level, int degree);

  int sub_functions() const { return p_; }
  const std::vector<Entry>& entries(int a, int b) const { return entries_[a * (1 << n_) + b]; }

  /// Values of weight id's P sub-functions at a finest-grid point (side
  /// 0: left limit, 1: right limit).
  std::span<const double> point_values(int id, int point, int side) const;

private:
  int n_ = 0;
  int k1_ = 1;
  int p_ = 1;
  std::vector<std::vector<Entry>> entries_;
  std::vector<std::unique_ptr<std::vector<double>>> storage_;
  std::vector<std::vector<double>> point_values_;  ///< [id][(point * 2 + side) * P + p]
};

}  // namespace sgdg
