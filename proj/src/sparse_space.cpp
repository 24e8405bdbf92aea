#include "sgdg/sparse_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "sgdg/error.hpp"

namespace sgdg {

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::VHat: return "vhat";
    case SpaceKind::VTilde: return "vtilde";
    case SpaceKind::VHatHat: return "vhathat";
  }
  return "?";
}

SpaceKind parse_space_kind(const std::string& name) {
  if (name == "vhat") return SpaceKind::VHat;
  if (name == "vtilde") return SpaceKind::VTilde;
  if (name == "vhathat") return SpaceKind::VHatHat;
  throw ConfigError("unknown space kind '" + name + "' (expected vhat|vtilde|vhathat)");
}

int MultiIndex::l1() const {
  int s = 0;
  for (int x : v_) s += x;
  return s;
}

int MultiIndex::linf() const {
  int s = 0;
  for (int x : v_) s = std::max(s, x);
  return s;
}

int MultiIndex::zeros() const {
  return static_cast<int>(std::count(v_.begin(), v_.end(), 0));
}

bool MultiIndex::leq(const MultiIndex& other) const {
  for (int m = 0; m < size(); ++m)
    if (v_[m] > other.v_[m]) return false;
  return true;
}

std::size_t VecHash::operator()(const std::vector<int>& v) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int x : v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

double SpaceSpec::mesh_size() const { return std::ldexp(1.0, -n_); }

std::optional<int> SpaceSpec::find_element(const std::vector<int>& e1d) const {
  auto it = element_lookup_.find(e1d);
  if (it == element_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> SpaceSpec::index_of(const BasisId& id) const {
  if (id.level.size() != d_) return std::nullopt;
  std::vector<int> e(d_);
  for (int m = 0; m < d_; ++m) {
    if (id.cell[m] < 0 || id.cell[m] >= cells_at_level(id.level[m])) return std::nullopt;
    e[m] = element_index(id.level[m], id.cell[m]);
  }
  const auto el = find_element(e);
  if (!el) return std::nullopt;
  std::vector<int> p(id.poly.entries().begin(), id.poly.entries().end());
  auto it = poly_lookup_.find(p);
  if (it == poly_lookup_.end()) return std::nullopt;
  return elements_[*el].first_dof + it->second;
}

bool SpaceSpec::admits_level(const MultiIndex& level) const {
  return level_admissible(kind_, d_, n_, level);
}

bool level_admissible(SpaceKind kind, int d, int n, const MultiIndex& level) {
  if (level.size() != d) return false;
  for (int m = 0; m < d; ++m)
    if (level[m] < 0) return false;
  switch (kind) {
    case SpaceKind::VHat:
    case SpaceKind::VHatHat: return level.l1() <= n;
    case SpaceKind::VTilde: return level.l1() <= n + d - 1 && level.linf() <= n;
  }
  return false;
}

std::vector<MultiIndex> admissible_levels(SpaceKind kind, int d, int n) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(d, 0);
  const int budget = kind == SpaceKind::VTilde ? n + d - 1 : n;
  std::function<void(int, int)> rec = [&](int m, int used) {
    if (m == d) {
      MultiIndex l(cur);
      if (level_admissible(kind, d, n, l)) out.push_back(std::move(l));
      return;
    }
    for (int v = 0; v <= std::min(n, budget - used); ++v) {
      cur[m] = v;
      rec(m + 1, used + v);
    }
  };
  rec(0, 0);
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.l1() != b.l1()) return a.l1() < b.l1();
    return a < b;
  });
  return out;
}

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("dimension overflows 64-bit integer");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw ResourceError("dimension overflows 64-bit integer");
  return r;
}

std::int64_t binom(std::int64_t n, std::int64_t r) {
  if (r < 0 || r > n) return 0;
  std::int64_t c = 1;
  for (std::int64_t i = 1; i <= r; ++i) c = checked_mul(c, n - r + i) / i;
  return c;
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, b);
  return r;
}

// The level-counting brace of the dimension lemma:
//   sum_{m=0}^{d-1} C(d,m) ((-1)^{d-m} + 2^{N+m-d+1} sum_{n=0}^{d-m-1} C(N,n) (-2)^{d-m-1-n}) + 1
// 2^{N+m-d+1} may be a negative power; the inner sum is then divisible by it.
std::int64_t level_brace(int d, int n) {
  std::int64_t total = 1;
  for (int m = 0; m <= d - 1; ++m) {
    std::int64_t inner = 0;
    for (int q = 0; q <= d - m - 1; ++q)
      inner = checked_add(inner, checked_mul(binom(n, q), ipow(-2, d - m - 1 - q)));
    const int e = n + m - d + 1;
    std::int64_t scaled = 0;
    if (e >= 0) {
      scaled = checked_mul(inner, ipow(2, e));
    } else {
      const std::int64_t div = ipow(2, -e);
      if (inner % div != 0) throw std::logic_error("dimension formula: non-integral term");
      scaled = inner / div;
    }
    const std::int64_t sign = (d - m) % 2 == 0 ? 1 : -1;
    total = checked_add(total, checked_mul(binom(d, m), sign + scaled));
  }
  return total;
}

std::int64_t w_dim(int level) { return level == 0 ? 1 : std::int64_t{1} << (level - 1); }

}  // namespace

std::int64_t dim_closed_form(SpaceKind kind, int d, int n, int k) {
  if (d < 1 || n < 0 || k < 0) throw ConfigError("dim_closed_form: need d >= 1, N >= 0, k >= 0");
  switch (kind) {
    case SpaceKind::VHat: return checked_mul(ipow(k + 1, d), level_brace(d, n));
    case SpaceKind::VHatHat: return checked_mul(binom(k + d, d), level_brace(d, n));
    case SpaceKind::VTilde: break;
  }
  throw ConfigError("dim_closed_form: no closed form for vtilde; use dim_by_count");
}

std::int64_t dim_by_count(SpaceKind kind, int d, int n, int k) {
  if (d < 1 || n < 0 || k < 0) throw ConfigError("dim_by_count: need d >= 1, N >= 0, k >= 0");
  std::int64_t cells = 0;
  for (const auto& l : admissible_levels(kind, d, n)) {
    std::int64_t c = 1;
    for (int m = 0; m < d; ++m) c = checked_mul(c, w_dim(l[m]));
    cells = checked_add(cells, c);
  }
  const std::int64_t per = kind == SpaceKind::VHatHat ? binom(k + d, d) : ipow(k + 1, d);
  return checked_mul(cells, per);
}

std::int64_t full_grid_dim(int d, int n, int k) {
  if (d < 1 || n < 0 || k < 0) throw ConfigError("full_grid_dim: need d >= 1, N >= 0, k >= 0");
  if (n >= 62) throw ResourceError("full grid dimension overflows 64-bit integer");
  return ipow(checked_mul(std::int64_t{1} << n, k + 1), d);
}

SpaceSpec enumerate(SpaceKind kind, int d, int n, int k, std::int64_t dof_cap) {
  if (d < 1 || n < 0 || k < 0) throw ConfigError("enumerate: need d >= 1, N >= 0, k >= 0");
  if (n > 30) throw ResourceError("enumerate: level too large");
  if (kind == SpaceKind::VHatHat ? k > kMaxAlpertDegree : k > kMaxAlpertDegree)
    throw ConfigError("enumerate: degree must be <= " + std::to_string(kMaxAlpertDegree));
  const std::int64_t predicted = dim_by_count(kind, d, n, k);
  if (predicted > dof_cap)
    throw ResourceError("space dimension " + std::to_string(predicted) + " exceeds cap " +
                        std::to_string(dof_cap));

  SpaceSpec s;
  s.kind_ = kind;
  s.d_ = d;
  s.n_ = n;
  s.k_ = k;

  // polynomial multi-indices, lexicographic
  {
    std::vector<int> cur(d, 0);
    std::function<void(int, int)> rec = [&](int m, int used) {
      if (m == d) {
        if (kind != SpaceKind::VHatHat || used <= k) s.polys_.emplace_back(cur);
        return;
      }
      for (int v = 0; v <= k; ++v) {
        cur[m] = v;
        rec(m + 1, used + v);
      }
    };
    rec(0, 0);
  }
  for (int p = 0; p < static_cast<int>(s.polys_.size()); ++p) {
    const auto e = s.polys_[p].entries();
    s.poly_lookup_.emplace(std::vector<int>(e.begin(), e.end()), p);
  }

  s.levels_ = admissible_levels(kind, d, n);
  s.dofs_.reserve(static_cast<std::size_t>(predicted));
  const int per = static_cast<int>(s.polys_.size());
  for (const auto& level : s.levels_) {
    std::vector<int> cells(d, 0);
    while (true) {
      SpaceElement el;
      el.level = level;
      el.cell = MultiIndex(cells);
      el.e1d.resize(d);
      for (int m = 0; m < d; ++m) el.e1d[m] = element_index(level[m], cells[m]);
      el.first_dof = static_cast<int>(s.dofs_.size());
      s.element_lookup_.emplace(el.e1d, static_cast<int>(s.elements_.size()));
      for (int p = 0; p < per; ++p) s.dofs_.push_back(BasisId{level, el.cell, s.polys_[p]});
      s.elements_.push_back(std::move(el));
      // next cell multi-index, lexicographic (last coordinate fastest)
      int m = d - 1;
      while (m >= 0) {
        if (++cells[m] < cells_at_level(level[m])) break;
        cells[m] = 0;
        --m;
      }
      if (m < 0) break;
    }
  }
  return s;
}

std::vector<Interval> support_box(const BasisId& id) {
  std::vector<Interval> box(id.level.size());
  for (int m = 0; m < id.level.size(); ++m) box[m] = element_support(id.level[m], id.cell[m]);
  return box;
}

std::optional<std::vector<Interval>> supports_overlap(const BasisId& a, const BasisId& b) {
  const auto ba = support_box(a);
  const auto bb = support_box(b);
  std::vector<Interval> out(ba.size());
  for (std::size_t m = 0; m < ba.size(); ++m) {
    out[m] = {std::max(ba[m].lo, bb[m].lo), std::min(ba[m].hi, bb[m].hi)};
    if (!(out[m].hi > out[m].lo)) return std::nullopt;
  }
  return out;
}

}  // namespace sgdg
