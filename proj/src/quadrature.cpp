#include "sgdg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"

namespace sgdg {

int smolyak_level(int iquad, int level_l1) {
  const int q = static_cast<int>(std::ceil(iquad - 0.5 * level_l1));
  return std::max(1, q);
}

QuadRuleND tensor_rule(int dim, int m) {
  const QuadRule1D& g = gauss_rule_cached(m);
  QuadRuleND r;
  r.dim = dim;
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= m;
  r.points.resize(n * dim);
  r.weights.resize(n);
  std::vector<int> idx(dim, 0);
  for (std::size_t q = 0; q < n; ++q) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      r.points[q * dim + i] = g.nodes[idx[i]];
      w *= g.weights[idx[i]];
    }
    r.weights[q] = w;
    for (int i = dim - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return r;
}

namespace {

double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

QuadRuleND build_smolyak(int dim, int level) {
  QuadRuleND r;
  r.dim = dim;
  if (dim == 0) {
    r.weights = {1.0};
    return r;
  }
  // A(q, d) = sum_{q <= |i| <= q+d-1, i >= 1} (-1)^{q+d-1-|i|} C(d-1, q+d-1-|i|) (x) U^{i_m}
  std::map<std::vector<double>, double> merged;
  std::vector<int> idx(dim, 1);
  const int top = level + dim - 1;
  std::function<void(int, int)> rec = [&](int m, int used) {
    if (m == dim) {
      if (used < level) return;
      const int s = top - used;
      const double coef = (s % 2 == 0 ? 1.0 : -1.0) * binomial(dim - 1, s);
      if (coef == 0.0) return;
      std::vector<const QuadRule1D*> rules(dim);
      for (int i = 0; i < dim; ++i) rules[i] = &gauss_rule_cached((1 << idx[i]) + 1);
      std::vector<int> pos(dim, 0);
      std::vector<double> x(dim);
      while (true) {
        double w = coef;
        for (int i = 0; i < dim; ++i) {
          x[i] = rules[i]->nodes[pos[i]];
          w *= rules[i]->weights[pos[i]];
        }
        merged[x] += w;
        int i = dim - 1;
        for (; i >= 0; --i) {
          if (++pos[i] < rules[i]->size()) break;
          pos[i] = 0;
        }
        if (i < 0) break;
      }
      return;
    }
    for (int v = 1; used + v + (dim - m - 1) <= top; ++v) {
      idx[m] = v;
      rec(m + 1, used + v);
    }
  };
  rec(0, 0);
  r.points.reserve(merged.size() * dim);
  r.weights.reserve(merged.size());
  for (const auto& [x, w] : merged) {
    if (w == 0.0) continue;
    r.points.insert(r.points.end(), x.begin(), x.end());
    r.weights.push_back(w);
  }
  return r;
}

}  // namespace

const QuadRuleND& smolyak_rule(int dim, int level) {
  if (dim < 0 || level < 1) throw ConfigError("smolyak_rule: need dim >= 0 and level >= 1");
  if (level > 12) throw ConfigError("smolyak_rule: level must be <= 12");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadRuleND> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dim, level);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_smolyak(dim, level)).first;
  return it->second;
}

const QuadRuleND& patch_rule(int dim, int level_l1, int degree, const QuadConfig& cfg) {
  if (cfg.mode == QuadConfig::Mode::SmolyakPerPatch) return smolyak_rule(dim, smolyak_level(cfg.iquad, level_l1));
  const int m = cfg.points_per_cell > 0 ? cfg.points_per_cell : degree + 2;
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadRuleND> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dim, m);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, tensor_rule(dim, m)).first;
  return it->second;
}

namespace {

std::vector<Interval> patches_1d(int level, int cell) {
  const Interval s = element_support(level, cell);
  if (level == 0) return {s};
  const double mid = 0.5 * (s.lo + s.hi);
  return {{s.lo, mid}, {mid, s.hi}};
}

// Cartesian product of per-coordinate interval lists.
std::vector<std::vector<Interval>> product(const std::vector<std::vector<Interval>>& parts) {
  std::vector<std::vector<Interval>> out{{}};
  for (const auto& p : parts) {
    std::vector<std::vector<Interval>> next;
    for (const auto& prefix : out)
      for (const auto& iv : p) {
        auto v = prefix;
        v.push_back(iv);
        next.push_back(std::move(v));
      }
    out = std::move(next);
  }
  return out;
}

[[noreturn]] void report_non_finite(std::span<const double> x, double value) {
  std::ostringstream os;
  os << "non-finite integrand value " << value << " at (";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  throw IntegrationError(os.str());
}

}  // namespace

std::vector<std::vector<Interval>> basis_patches(const MultiIndex& level, const MultiIndex& cell) {
  std::vector<std::vector<Interval>> parts;
  for (int m = 0; m < level.size(); ++m) parts.push_back(patches_1d(level[m], cell[m]));
  return product(parts);
}

std::vector<double> integrate_against_element(const ScalarField& f, const MultiIndex& level,
                                              const MultiIndex& cell, const std::vector<MultiIndex>& polys,
                                              const Basis1D& basis, const QuadConfig& cfg) {
  const int d = level.size();
  const int k1 = basis.per_element();
  const QuadRuleND& rule = patch_rule(d, level.l1(), basis.degree(), cfg);
  std::vector<double> out(polys.size(), 0.0);
  std::vector<double> x(d);
  std::vector<double> vals(static_cast<std::size_t>(d) * k1);
  for (const auto& box : basis_patches(level, cell)) {
    double vol = 1.0;
    for (const auto& iv : box) vol *= iv.length();
    for (int q = 0; q < rule.size(); ++q) {
      const auto t = rule.point(q);
      for (int m = 0; m < d; ++m) {
        x[m] = box[m].lo + box[m].length() * t[m];
        basis.eval_element(level[m], cell[m], x[m], Side::Left,
                           std::span<double>(vals.data() + m * k1, k1));
      }
      const double fx = f(x);
      if (!std::isfinite(fx)) report_non_finite(x, fx);
      const double w = rule.weights[q] * vol * fx;
      for (std::size_t p = 0; p < polys.size(); ++p) {
        double v = w;
        for (int m = 0; m < d; ++m) v *= vals[m * k1 + polys[p][m]];
        out[p] += v;
      }
    }
  }
  return out;
}

double integrate_against_basis(const ScalarField& f, const BasisId& b, const Basis1D& basis,
                               const QuadConfig& cfg) {
  return integrate_against_element(f, b.level, b.cell, {b.poly}, basis, cfg)[0];
}

std::vector<double> integrate_boundary_element(const ScalarField& g, Face face, const MultiIndex& level,
                                               const MultiIndex& cell, const std::vector<MultiIndex>& polys,
                                               const Basis1D& basis, const ScalarField& kappa, double penalty,
                                               const QuadConfig& cfg) {
  const int d = level.size();
  if (face.coord < 0 || face.coord >= d || (face.side != 0 && face.side != 1))
    throw ConfigError("integrate_boundary: invalid face");
  const int k1 = basis.per_element();
  const int m0 = face.coord;
  const double xb = face.side;
  const double normal = face.side == 0 ? -1.0 : 1.0;
  const Side side = face.side == 0 ? Side::Right : Side::Left;

  std::vector<double> nvals(k1);
  std::vector<double> nders(k1);
  basis.eval_element(level[m0], cell[m0], xb, side, nvals, nders);
  std::vector<double> out(polys.size(), 0.0);
  bool any = false;
  for (int i = 0; i < k1; ++i) any = any || nvals[i] != 0.0 || nders[i] != 0.0;
  if (!any) return out;

  std::vector<std::vector<Interval>> parts;
  for (int m = 0; m < d; ++m)
    parts.push_back(m == m0 ? std::vector<Interval>{{xb, xb}} : patches_1d(level[m], cell[m]));
  const QuadRuleND& rule = patch_rule(d - 1, level.l1(), basis.degree(), cfg);

  std::vector<double> x(d);
  std::vector<double> vals(static_cast<std::size_t>(d) * k1);
  for (const auto& box : product(parts)) {
    double vol = 1.0;
    for (int m = 0; m < d; ++m)
      if (m != m0) vol *= box[m].length();
    for (int q = 0; q < rule.size(); ++q) {
      const auto t = rule.point(q);
      int tc = 0;
      for (int m = 0; m < d; ++m) {
        if (m == m0) {
          x[m] = xb;
          continue;
        }
        x[m] = box[m].lo + box[m].length() * t[tc++];
        basis.eval_element(level[m], cell[m], x[m], Side::Left,
                           std::span<double>(vals.data() + m * k1, k1));
      }
      const double gx = g(x);
      if (!std::isfinite(gx)) report_non_finite(x, gx);
      if (gx == 0.0) continue;
      const double kx = kappa(x);
      if (!std::isfinite(kx)) report_non_finite(x, kx);
      const double w = rule.weights[q] * vol * gx;
      for (std::size_t p = 0; p < polys.size(); ++p) {
        double tang = 1.0;
        for (int m = 0; m < d; ++m)
          if (m != m0) tang *= vals[m * k1 + polys[p][m]];
        const int i0 = polys[p][m0];
        out[p] += w * tang * (kx * nders[i0] * normal + penalty * nvals[i0]);
      }
    }
  }
  return out;
}

double integrate_boundary(const ScalarField& g, Face face, const BasisId& b, const Basis1D& basis,
                          const ScalarField& kappa, double penalty, const QuadConfig& cfg) {
  return integrate_boundary_element(g, face, b.level, b.cell, {b.poly}, basis, kappa, penalty, cfg)[0];
}

}  // namespace sgdg
