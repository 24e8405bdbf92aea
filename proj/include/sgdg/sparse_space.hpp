#pragma once

// Multi-index arithmetic and the three sparse DG spaces:
//   VHat    : levels with |l|_1 <= N
//   VTilde  : levels with |l|_1 <= N + d - 1 and |l|_inf <= N
//   VHatHat : levels with |l|_1 <= N, polynomial indices with |i - 1|_1 <= k
// (VHatHat uses the non-orthogonal hierarchical family.)

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgdg/basis1d.hpp"

namespace sgdg {

inline constexpr std::int64_t kDefaultDofCap = 2'000'000;

enum class SpaceKind { VHat, VTilde, VHatHat };

std::string to_string(SpaceKind kind);
SpaceKind parse_space_kind(const std::string& name);

class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : v_(std::move(entries)) {}
  MultiIndex(std::initializer_list<int> entries) : v_(entries) {}

  int size() const { return static_cast<int>(v_.size()); }
  int operator[](int m) const { return v_[m]; }
  int& operator[](int m) { return v_[m]; }
  std::span<const int> entries() const { return v_; }

  int l1() const;
  int linf() const;
  /// Number of zero entries (|l|_0 in the dimension count).
  int zeros() const;

  /// Componentwise a <= b.
  bool leq(const MultiIndex& other) const;
  /// a <= b and a != b.
  bool less(const MultiIndex& other) const { return leq(other) && *this != other; }

  bool operator==(const MultiIndex&) const = default;
  auto operator<=>(const MultiIndex&) const = default;

private:
  std::vector<int> v_;
};

/// One tensor-product basis function.  Poly entries are 0-based (i_m - 1).
struct BasisId {
  MultiIndex level;
  MultiIndex cell;
  MultiIndex poly;

  bool operator==(const BasisId&) const = default;
};

/// A (level, cell) block of the space: all admissible polynomial indices of
/// one tensor-product support.
struct SpaceElement {
  MultiIndex level;
  MultiIndex cell;
  std::vector<int> e1d;  ///< 1D element ordinal per coordinate
  int first_dof = 0;
};

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept;
};

class SpaceSpec {
public:
  SpaceKind kind() const { return kind_; }
  int dim() const { return d_; }
  int max_level() const { return n_; }
  int degree() const { return k_; }
  double mesh_size() const;
  Family family() const { return kind_ == SpaceKind::VHatHat ? Family::NonOrthogonal : Family::Orthonormal; }

  int size() const { return static_cast<int>(dofs_.size()); }
  const std::vector<BasisId>& dofs() const { return dofs_; }
  const std::vector<SpaceElement>& elements() const { return elements_; }
  /// Admissible polynomial multi-indices, identical for every element, in
  /// lexicographic order.  Element e owns dofs first_dof .. first_dof + polys().size() - 1.
  const std::vector<MultiIndex>& polys() const { return polys_; }
  /// Distinct level multi-indices in DOF order.
  const std::vector<MultiIndex>& levels() const { return levels_; }

  std::optional<int> index_of(const BasisId& id) const;
  std::optional<int> find_element(const std::vector<int>& e1d) const;
  int element_of_dof(int dof) const { return dof / static_cast<int>(polys_.size()); }

  bool admits_level(const MultiIndex& level) const;

private:
  friend SpaceSpec enumerate(SpaceKind, int, int, int, std::int64_t);

  SpaceKind kind_ = SpaceKind::VHat;
  int d_ = 1;
  int n_ = 0;
  int k_ = 0;
  std::vector<BasisId> dofs_;
  std::vector<SpaceElement> elements_;
  std::vector<MultiIndex> polys_;
  std::vector<MultiIndex> levels_;
  std::unordered_map<std::vector<int>, int, VecHash> element_lookup_;
  std::unordered_map<std::vector<int>, int, VecHash> poly_lookup_;
};

/// Level admissibility without building a space.
bool level_admissible(SpaceKind kind, int d, int n, const MultiIndex& level);

/// Every admissible level multi-index, ordered by (|l|_1, lexicographic).
std::vector<MultiIndex> admissible_levels(SpaceKind kind, int d, int n);

/// Builds the ordered DOF list.  Throws ResourceError past `dof_cap`.
SpaceSpec enumerate(SpaceKind kind, int d, int n, int k, std::int64_t dof_cap = kDefaultDofCap);

/// Closed-form dimension for VHat and VHatHat; ConfigError for VTilde.
std::int64_t dim_closed_form(SpaceKind kind, int d, int n, int k);

/// Dimension by counting levels (works for every kind, no DOF list).
std::int64_t dim_by_count(SpaceKind kind, int d, int n, int k);

/// (2^N (k+1))^d, ResourceError on 64-bit overflow.
std::int64_t full_grid_dim(int d, int n, int k);

/// Support box of a tensor basis function.
std::vector<Interval> support_box(const BasisId& id);

/// Overlap box when the supports intersect in a set of positive measure.
std::optional<std::vector<Interval>> supports_overlap(const BasisId& a, const BasisId& b);

}  // namespace sgdg
