#pragma once

// One-dimensional hierarchical multiwavelet bases on [0,1].
//
// Level 0 is spanned by the orthonormal (scaled) Legendre polynomials of
// degree 0..k.  Level n >= 1 functions live on the dyadic cell
// [j 2^{1-n}, (j+1) 2^{1-n}] and are polynomial on each of its two halves,
// which are cells of the level-n grid.
//
// Every polynomial piece is stored in the cell-orthonormal Legendre basis:
// on a cell of length len with local coordinate t in [-1,1] the piece equals
//   len^{-1/2} * sum_p c_p sqrt(2p+1) P_p(t).
// With this normalization the coefficients of a level-n function on its two
// cells are exactly the coefficients of its generator on (-1,0) and (0,1).

#include <array>
#include <span>
#include <vector>

namespace sgdg {

inline constexpr int kMaxAlpertDegree = 9;

/// Which one-sided limit to take at a cell interface.  Cells are half-open
/// (a, b], so plain point evaluation at an interior breakpoint uses Left.
enum class Side { Left, Right };

/// P_0..P_n (and optionally P_0'..P_n') at t.
void legendre_values(int n, double t, std::span<double> p, std::span<double> dp = {});

/// Polynomial piece in the cell-orthonormal Legendre basis (unit-length cell).
struct PolyCoeffs {
  std::vector<double> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  /// sum_p c_p sqrt(2p+1) P_p(t), t in [-1,1].
  double value(double t) const;
  /// d/dt of value().
  double derivative(double t) const;
};

/// Generator supported on [-1,1]: one polynomial on (-1,0), one on (0,1).
struct Generator {
  PolyCoeffs left;
  PolyCoeffs right;

  /// Value at x in [-1,1]; x == 0 takes the left piece.
  double operator()(double x, Side side = Side::Left) const;
};

/// Orthonormal vanishing-moment generators f_1..f_{k+1} (returned 0-based).
/// Throws ConfigError unless 0 <= k <= kMaxAlpertDegree.
std::vector<Generator> build_alpert_generators(int k);

/// Non-orthogonal generators: x^{i-1} on (-1,0) and -x^{i-1} on (0,1).
std::vector<Generator> build_nonorthogonal_generators(int k);

enum class Family { Orthonormal, NonOrthogonal };

/// One basis function v_{i,n}^j.  `poly` is 0-based (poly = i - 1).
struct Wavelet1D {
  int level = 0;
  int cell = 0;
  int poly = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// The k+1 functions sharing a (level, cell) pair form one 1D "element".
/// Elements are numbered 0 for level 0 and 2^{n-1} + j for level n >= 1, so
/// the elements up to level N are exactly 0 .. 2^N - 1.
struct Element1D {
  int level = 0;
  int cell = 0;
};

int cells_at_level(int level);
int element_index(int level, int cell);
Element1D element_of(int index);
Interval element_support(int level, int cell);

/// Index of the level-`level` grid cell containing x, with the given side
/// convention at cell interfaces.  Clamped to the grid.
int locate_cell(int level, double x, Side side);

class Basis1D {
public:
  explicit Basis1D(int degree, Family family = Family::Orthonormal);

  int degree() const { return degree_; }
  int per_element() const { return degree_ + 1; }
  Family family() const { return family_; }

  /// Values (and optionally derivatives) of all k+1 functions of an element at
  /// x.  Zero outside the element's support (one-sided at its endpoints).
  void eval_element(int level, int cell, double x, Side side, std::span<double> values,
                    std::span<double> derivs = {}) const;

  double eval(const Wavelet1D& w, double x) const { return eval(w, x, default_side(x)); }
  double eval(const Wavelet1D& w, double x, Side side) const;
  double eval_deriv(const Wavelet1D& w, double x) const { return eval_deriv(w, x, default_side(x)); }
  double eval_deriv(const Wavelet1D& w, double x, Side side) const;

  /// Piece of basis function `poly` on the level-n cell that is the left (0)
  /// or right (1) half of its support; level-0 functions use piece 0 only.
  const PolyCoeffs& piece(int level, int poly, int half) const;

  const std::vector<Generator>& generators() const { return generators_; }

  static Side default_side(double x) { return x <= 0.0 ? Side::Right : Side::Left; }

private:
  int degree_;
  Family family_;
  std::vector<Generator> generators_;
  std::vector<PolyCoeffs> level0_;
};

}  // namespace sgdg
