#include "sgdg/operators1d.hpp"

#include <algorithm>

#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"

namespace sgdg {

Weight1D Weight1D::constant(double c) {
  Weight1D w;
  w.scale = c;
  return w;
}

Weight1D Weight1D::smooth(std::function<double(double)> f) {
  Weight1D w;
  w.fn = [f = std::move(f)](double x, Side) { return f(x); };
  return w;
}

int hierarchy_size(int max_level, int degree) { return (1 << max_level) * (degree + 1); }

std::vector<int> element_chain(int max_level, int cell) {
  std::vector<int> out(max_level + 1);
  out[0] = 0;
  for (int n = 1; n <= max_level; ++n) out[n] = element_index(n, cell >> (max_level - n + 1));
  return out;
}

namespace {

void check_level(int max_level) {
  if (max_level < 0 || max_level > 20) throw ConfigError("1D operators: level must be in 0..20");
}

// Values and derivatives of every element in a finest cell's chain at x.
struct ChainEval {
  std::vector<int> elements;
  std::vector<double> vals;  // [chain pos][poly]
  std::vector<double> ders;

  void eval(const Basis1D& basis, int max_level, int cell, double x, Side side) {
    elements = element_chain(max_level, cell);
    const int k1 = basis.per_element();
    vals.assign(elements.size() * k1, 0.0);
    ders.assign(elements.size() * k1, 0.0);
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const auto el = element_of(elements[i]);
      basis.eval_element(el.level, el.cell, x, side, std::span<double>(vals.data() + i * k1, k1),
                         std::span<double>(ders.data() + i * k1, k1));
    }
  }
};

// sum over finest cells of int w * u(a) * u(b), u = value or derivative.
// [lo, hi] cut at the breaks strictly inside it
std::vector<std::pair<double, double>> split_interval(double lo, double hi, const std::vector<double>& breaks) {
  std::vector<std::pair<double, double>> out;
  double a = lo;
  for (double x : breaks)
    if (x > a && x < hi) {
      out.emplace_back(a, x);
      a = x;
    }
  out.emplace_back(a, hi);
  return out;
}

DenseMatrix cell_integral(const Basis1D& basis, int max_level, const Weight1D& weight, int points, bool derivs) {
  check_level(max_level);
  const int k1 = basis.per_element();
  const int dim = hierarchy_size(max_level, basis.degree());
  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  const int m = points > 0 ? points : basis.degree() + 4;
  const auto& rule = gauss_rule_cached(m);
  const double h = std::ldexp(1.0, -max_level);
  ChainEval ev;
  std::vector<double> breaks = weight.breaks;
  std::sort(breaks.begin(), breaks.end());
  for (int c = 0; c < (1 << max_level); ++c)
    for (const auto& [lo, hi] : split_interval(c * h, (c + 1) * h, breaks))
      for (int q = 0; q < rule.size(); ++q) {
        const double x = lo + rule.nodes[q] * (hi - lo);
        ev.eval(basis, max_level, c, x, Side::Left);
        const double w = rule.weights[q] * (hi - lo) * weight(x, Side::Left);
      const auto& u = derivs ? ev.ders : ev.vals;
        const int len = static_cast<int>(ev.elements.size());
        for (int i = 0; i < len; ++i)
          for (int j = 0; j < len; ++j)
            for (int p = 0; p < k1; ++p)
              for (int r = 0; r < k1; ++r)
                out(ev.elements[i] * k1 + p, ev.elements[j] * k1 + r) += w * u[i * k1 + p] * u[j * k1 + r];
      }
  return out;
}

// Traces of the elements whose closure contains finest point p.
struct PointTrace {
  std::vector<int> elements;
  std::vector<double> vl, dl, vr, dr;  // [pos][poly], zero where the side is absent
};

PointTrace point_trace(const Basis1D& basis, int max_level, int p) {
  const int k1 = basis.per_element();
  const int cells = 1 << max_level;
  const double x = std::ldexp(static_cast<double>(p), -max_level);
  PointTrace t;
  if (p > 0) {
    for (int e : element_chain(max_level, p - 1)) t.elements.push_back(e);
  }
  if (p < cells) {
    for (int e : element_chain(max_level, p))
      if (std::find(t.elements.begin(), t.elements.end(), e) == t.elements.end()) t.elements.push_back(e);
  }
  const std::size_t n = t.elements.size() * k1;
  t.vl.assign(n, 0.0);
  t.dl.assign(n, 0.0);
  t.vr.assign(n, 0.0);
  t.dr.assign(n, 0.0);
  for (std::size_t i = 0; i < t.elements.size(); ++i) {
    const auto el = element_of(t.elements[i]);
    if (p > 0)
      basis.eval_element(el.level, el.cell, x, Side::Left, std::span<double>(t.vl.data() + i * k1, k1),
                         std::span<double>(t.dl.data() + i * k1, k1));
    if (p < cells)
      basis.eval_element(el.level, el.cell, x, Side::Right, std::span<double>(t.vr.data() + i * k1, k1),
                         std::span<double>(t.dr.data() + i * k1, k1));
  }
  return t;
}

// Jump (left - right) at interior points, trace times outward normal at the boundary.
double jump_value(const PointTrace& t, int cells, int p, std::size_t idx) {
  if (p == 0) return -t.vr[idx];
  if (p == cells) return t.vl[idx];
  return t.vl[idx] - t.vr[idx];
}

}  // namespace

DenseMatrix mass_1d(const Basis1D& basis, int max_level, const Weight1D& weight, int points) {
  if (weight.is_constant() && basis.family() == Family::Orthonormal) {
    check_level(max_level);
    const int dim = hierarchy_size(max_level, basis.degree());
    return weight.scale * DenseMatrix::Identity(dim, dim);
  }
  return cell_integral(basis, max_level, weight, points, false);
}

DenseMatrix stiffness_1d(const Basis1D& basis, int max_level, const Weight1D& weight, int points) {
  return cell_integral(basis, max_level, weight, points, true);
}

FaceOperators1D face_operators_1d(const Basis1D& basis, int max_level, const Weight1D& weight) {
  check_level(max_level);
  const int k1 = basis.per_element();
  const int dim = hierarchy_size(max_level, basis.degree());
  const int cells = 1 << max_level;
  FaceOperators1D ops;
  ops.flux = DenseMatrix::Zero(dim, dim);
  ops.jump = DenseMatrix::Zero(dim, dim);
  ops.boundary_left = DenseMatrix::Zero(dim, dim);
  ops.boundary_right = DenseMatrix::Zero(dim, dim);
  ops.boundary_jump = DenseMatrix::Zero(dim, dim);
  for (int p = 0; p <= cells; ++p) {
    const PointTrace t = point_trace(basis, max_level, p);
    const double x = std::ldexp(static_cast<double>(p), -max_level);
    const double wl = p > 0 ? weight(x, Side::Left) : 0.0;
    const double wr = p < cells ? weight(x, Side::Right) : 0.0;
    const int len = static_cast<int>(t.elements.size());
    for (int i = 0; i < len; ++i)
      for (int pi = 0; pi < k1; ++pi) {
        const std::size_t ia = i * k1 + pi;
        const int ra = t.elements[i] * k1 + pi;
        for (int j = 0; j < len; ++j)
          for (int pj = 0; pj < k1; ++pj) {
            const std::size_t ib = j * k1 + pj;
            const int cb = t.elements[j] * k1 + pj;
            const double jb = jump_value(t, cells, p, ib);
            const double ja = jump_value(t, cells, p, ia);
            if (p == 0) {
              ops.boundary_left(ra, cb) += -wr * t.dr[ia] * t.vr[ib];
              ops.boundary_jump(ra, cb) += ja * jb;
            } else if (p == cells) {
              ops.boundary_right(ra, cb) += wl * t.dl[ia] * t.vl[ib];
              ops.boundary_jump(ra, cb) += ja * jb;
            } else {
              ops.flux(ra, cb) += 0.5 * (wl * t.dl[ia] + wr * t.dr[ia]) * jb;
              ops.jump(ra, cb) += ja * jb;
            }
          }
      }
  }
  return ops;
}

std::vector<double> project_weight(const std::function<double(double)>& w, int max_level, int degree, int points) {
  check_level(max_level);
  const Basis1D basis(degree);
  const int k1 = degree + 1;
  std::vector<double> out(hierarchy_size(max_level, degree), 0.0);
  const auto& rule = gauss_rule_cached(points > 0 ? points : degree + 8);
  const double h = std::ldexp(1.0, -max_level);
  ChainEval ev;
  for (int c = 0; c < (1 << max_level); ++c)
    for (int q = 0; q < rule.size(); ++q) {
      const double x = (c + rule.nodes[q]) * h;
      ev.eval(basis, max_level, c, x, Side::Left);
      const double wx = rule.weights[q] * h * w(x);
      for (std::size_t i = 0; i < ev.elements.size(); ++i)
        for (int p = 0; p < k1; ++p) out[ev.elements[i] * k1 + p] += wx * ev.vals[i * k1 + p];
    }
  return out;
}

double eval_expansion(std::span<const double> coeffs, int max_level, int degree, double x, Side side) {
  const Basis1D basis(degree);
  const int k1 = degree + 1;
  if (static_cast<int>(coeffs.size()) != hierarchy_size(max_level, degree))
    throw ConfigError("eval_expansion: coefficient count does not match level and degree");
  if (x <= 0.0) side = Side::Right;
  if (x >= 1.0) side = Side::Left;
  const int cell = locate_cell(max_level, x, side);
  ChainEval ev;
  ev.eval(basis, max_level, cell, x, side);
  double s = 0.0;
  for (std::size_t i = 0; i < ev.elements.size(); ++i)
    for (int p = 0; p < k1; ++p) s += coeffs[ev.elements[i] * k1 + p] * ev.vals[i * k1 + p];
  return s;
}

// ---------------------------------------------------------------------------

namespace {

bool supports_overlap_1d(int a, int b) {
  const auto ea = element_of(a);
  const auto eb = element_of(b);
  const Interval ia = element_support(ea.level, ea.cell);
  const Interval ib = element_support(eb.level, eb.cell);
  return std::max(ia.lo, ib.lo) < std::min(ia.hi, ib.hi);
}

// Element with the smaller support (the finer one) of an overlapping pair.
int finer_of(int a, int b) { return element_of(a).level >= element_of(b).level ? a : b; }

// Finest cells inside the support of element e.
std::pair<int, int> finest_cells(int max_level, int e) {
  const auto el = element_of(e);
  if (el.level == 0) return {0, 1 << max_level};
  const int width = 1 << (max_level - el.level + 1);
  return {el.cell * width, (el.cell + 1) * width};
}

}  // namespace

PairTables1D::PairTables1D(const Basis1D& basis, int max_level) : n_(max_level), k1_(basis.per_element()) {
  check_level(max_level);
  if (max_level > 12) throw ResourceError("PairTables1D: level above 12 is not supported");
  const int ne = elements();
  const int cells = 1 << n_;
  const int bsize = k1_ * k1_;
  coupled_.assign(ne, {});
  overlapping_.assign(ne, {});
  faces_.assign(static_cast<std::size_t>(ne) * ne, {});
  jump_.assign(static_cast<std::size_t>(ne) * ne, {});
  mass_.assign(static_cast<std::size_t>(ne) * ne, {});

  for (int a = 0; a < ne; ++a)
    for (int b = 0; b < ne; ++b)
      if (supports_overlap_1d(a, b)) overlapping_[a].push_back(b);

  // mass blocks
  if (basis.family() == Family::Orthonormal) {
    for (int a = 0; a < ne; ++a) {
      auto& blk = mass_[static_cast<std::size_t>(a) * ne + a];
      blk.assign(bsize, 0.0);
      for (int i = 0; i < k1_; ++i) blk[i * k1_ + i] = 1.0;
    }
  } else {
    const auto& rule = gauss_rule_cached(k1_ + 1);
    const double h = std::ldexp(1.0, -n_);
    ChainEval ev;
    for (int c = 0; c < cells; ++c)
      for (int q = 0; q < rule.size(); ++q) {
        const double x = (c + rule.nodes[q]) * h;
        ev.eval(basis, n_, c, x, Side::Left);
        const double w = rule.weights[q] * h;
        for (std::size_t i = 0; i < ev.elements.size(); ++i)
          for (std::size_t j = 0; j < ev.elements.size(); ++j) {
            auto& blk = mass_[static_cast<std::size_t>(ev.elements[i]) * ne + ev.elements[j]];
            if (blk.empty()) blk.assign(bsize, 0.0);
            for (int p = 0; p < k1_; ++p)
              for (int r = 0; r < k1_; ++r) blk[p * k1_ + r] += w * ev.vals[i * k1_ + p] * ev.vals[j * k1_ + r];
          }
      }
  }

  // face points and jump blocks
  std::vector<double> alpha(bsize);
  for (int p = 0; p <= cells; ++p) {
    const PointTrace t = point_trace(basis, n_, p);
    const int len = static_cast<int>(t.elements.size());
    const bool boundary = p == 0 || p == cells;
    for (int i = 0; i < len; ++i)
      for (int j = 0; j < len; ++j) {
        const int a = t.elements[i];
        const int b = t.elements[j];
        const std::size_t key = static_cast<std::size_t>(a) * ne + b;
        bool any_jump = false;
        for (int pa = 0; pa < k1_; ++pa)
          for (int pb = 0; pb < k1_; ++pb) {
            const double v = jump_value(t, cells, p, i * k1_ + pa) * jump_value(t, cells, p, j * k1_ + pb);
            alpha[pa * k1_ + pb] = v;
            any_jump = any_jump || v != 0.0;
          }
        if (any_jump) {
          auto& blk = jump_[key];
          if (blk.empty()) blk.assign(bsize, 0.0);
          for (int e = 0; e < bsize; ++e) blk[e] += alpha[e];
        }
        for (int side = 0; side < 2; ++side) {
          if ((side == 0 && p == 0) || (side == 1 && p == cells)) continue;
          const auto& der = side == 0 ? t.dl : t.dr;
          const double ws = boundary ? 1.0 : 0.5;
          bool any = false;
          for (int pa = 0; pa < k1_; ++pa)
            for (int pb = 0; pb < k1_; ++pb) {
              const double v = ws * (der[i * k1_ + pa] * jump_value(t, cells, p, j * k1_ + pb) +
                                     der[j * k1_ + pb] * jump_value(t, cells, p, i * k1_ + pa));
              alpha[pa * k1_ + pb] = v;
              any = any || v != 0.0;
            }
          if (any) faces_[key].push_back({p, side, ws, alpha});
        }
      }
  }

  for (int a = 0; a < ne; ++a)
    for (int b = 0; b < ne; ++b) {
      const std::size_t key = static_cast<std::size_t>(a) * ne + b;
      if (supports_overlap_1d(a, b) || !faces_[key].empty() || !jump_[key].empty()) coupled_[a].push_back(b);
    }
}

bool PairTables1D::overlap(int a, int b) const { return supports_overlap_1d(a, b); }

const double* PairTables1D::jump(int a, int b) const {
  const auto& blk = jump_[static_cast<std::size_t>(a) * elements() + b];
  return blk.empty() ? nullptr : blk.data();
}

const double* PairTables1D::mass(int a, int b) const {
  const auto& blk = mass_[static_cast<std::size_t>(a) * elements() + b];
  return blk.empty() ? nullptr : blk.data();
}

// ---------------------------------------------------------------------------

namespace {

// Evaluates the P sub-functions of weight `id` at x; returns false when all vanish.
using WeightEval = std::function<bool(int id, double x, Side side, std::span<double> out)>;

struct PairEntrySpec {
  int id;
  int level;
};

}  // namespace

static void build_weight_tables(const Basis1D& basis, int max_level, int p_sub, int points,
                                const std::function<std::vector<PairEntrySpec>(int, int)>& ids_for_pair,
                                const WeightEval& eval, std::vector<std::vector<WeightTables1D::Entry>>& entries,
                                std::vector<std::unique_ptr<std::vector<double>>>& storage, bool exact_mass_ids,
                                const std::vector<double>& const_scales, const std::vector<double>& breaks) {
  const int ne = 1 << max_level;
  const int k1 = basis.per_element();
  const int bsize = k1 * k1;
  const std::size_t stride = static_cast<std::size_t>(p_sub) * bsize;
  const auto& rule = gauss_rule_cached(points);
  const double h = std::ldexp(1.0, -max_level);
  entries.assign(static_cast<std::size_t>(ne) * ne, {});
  std::vector<double> va(k1), da(k1), vb(k1), db(k1), wv(p_sub);
  for (int a = 0; a < ne; ++a)
    for (int b = 0; b < ne; ++b) {
      if (!supports_overlap_1d(a, b)) continue;
      const auto specs = ids_for_pair(a, b);
      if (specs.empty()) continue;
      auto buf = std::make_unique<std::vector<double>>(specs.size() * 2 * stride, 0.0);
      double* base = buf->data();
      const auto ea = element_of(a);
      const auto eb = element_of(b);
      const auto [c0, c1] = finest_cells(max_level, finer_of(a, b));
      for (int c = c0; c < c1; ++c)
        for (const auto& [lo, hi] : split_interval(c * h, (c + 1) * h, breaks))
          for (int q = 0; q < rule.size(); ++q) {
            const double x = lo + rule.nodes[q] * (hi - lo);
            basis.eval_element(ea.level, ea.cell, x, Side::Left, va, da);
            basis.eval_element(eb.level, eb.cell, x, Side::Left, vb, db);
            const double w = rule.weights[q] * (hi - lo);
            for (std::size_t s = 0; s < specs.size(); ++s) {
              if (!eval(specs[s].id, x, Side::Left, wv)) continue;
              double* m = base + 2 * s * stride;
              double* st = m + stride;
              for (int p = 0; p < p_sub; ++p) {
                const double wp = w * wv[p];
                if (wp == 0.0) continue;
                for (int i = 0; i < k1; ++i)
                  for (int j = 0; j < k1; ++j) {
                    m[p * bsize + i * k1 + j] += wp * va[i] * vb[j];
                    st[p * bsize + i * k1 + j] += wp * da[i] * db[j];
                  }
              }
            }
          }
      if (exact_mass_ids) {
        for (std::size_t s = 0; s < specs.size(); ++s) {
          const double sc = const_scales[specs[s].id];
          if (std::isnan(sc)) continue;
          double* m = base + 2 * s * stride;
          for (int e = 0; e < bsize; ++e) m[e] = 0.0;
          if (a == b)
            for (int i = 0; i < k1; ++i) m[i * k1 + i] = sc;
        }
      }
      auto& list = entries[static_cast<std::size_t>(a) * ne + b];
      for (std::size_t s = 0; s < specs.size(); ++s)
        list.push_back({specs[s].id, specs[s].level, base + 2 * s * stride, base + 2 * s * stride + stride});
      storage.push_back(std::move(buf));
    }
}

WeightTables1D WeightTables1D::from_functions(const Basis1D& basis, int max_level,
                                              const std::vector<Weight1D>& weights, int points) {
  check_level(max_level);
  WeightTables1D t;
  t.n_ = max_level;
  t.k1_ = basis.per_element();
  t.p_ = 1;
  const int nw = static_cast<int>(weights.size());
  std::vector<PairEntrySpec> all;
  for (int i = 0; i < nw; ++i) all.push_back({i, 0});
  std::vector<double> scales(nw, std::nan(""));
  for (int i = 0; i < nw; ++i)
    if (weights[i].is_constant()) scales[i] = weights[i].scale;
  const WeightEval eval = [&](int id, double x, Side side, std::span<double> out) {
    out[0] = weights[id](x, side);
    return out[0] != 0.0;
  };
  std::vector<double> breaks;
  for (const auto& w : weights) breaks.insert(breaks.end(), w.breaks.begin(), w.breaks.end());
  std::sort(breaks.begin(), breaks.end());
  build_weight_tables(basis, max_level, 1, points > 0 ? points : basis.degree() + 4,
                      [&](int, int) { return all; }, eval, t.entries_, t.storage_,
                      basis.family() == Family::Orthonormal, scales, breaks);
  const int np = (1 << max_level) + 1;
  t.point_values_.assign(nw, std::vector<double>(static_cast<std::size_t>(np) * 2, 0.0));
  for (int i = 0; i < nw; ++i)
    for (int p = 0; p < np; ++p) {
      const double x = std::ldexp(static_cast<double>(p), -max_level);
      t.point_values_[i][p * 2 + 0] = weights[i](x, Side::Left);
      t.point_values_[i][p * 2 + 1] = weights[i](x, Side::Right);
    }
  return t;
}

WeightTables1D WeightTables1D::from_hierarchy(const Basis1D& basis, int max_level, int degree) {
  check_level(max_level);
  WeightTables1D t;
  t.n_ = max_level;
  t.k1_ = basis.per_element();
  t.p_ = degree + 1;
  const Basis1D wbasis(degree);
  const auto ids_for_pair = [](int a, int b) {
    const int f = finer_of(a, b);
    const auto ef = element_of(f);
    std::vector<PairEntrySpec> out{{0, 0}};
    for (int lam = 1; lam <= ef.level; ++lam) out.push_back({element_index(lam, ef.cell >> (ef.level - lam)), lam});
    return out;
  };
  const WeightEval eval = [&](int id, double x, Side side, std::span<double> out) {
    const auto el = element_of(id);
    wbasis.eval_element(el.level, el.cell, x, side, out);
    return true;
  };
  build_weight_tables(basis, max_level, t.p_, (degree + 2 * basis.degree()) / 2 + 1, ids_for_pair, eval,
                      t.entries_, t.storage_, false, {}, {});
  const int ne = 1 << max_level;
  const int np = ne + 1;
  t.point_values_.assign(ne, std::vector<double>(static_cast<std::size_t>(np) * 2 * t.p_, 0.0));
  for (int id = 0; id < ne; ++id) {
    const auto el = element_of(id);
    for (int p = 0; p < np; ++p) {
      const double x = std::ldexp(static_cast<double>(p), -max_level);
      for (int side = 0; side < 2; ++side) {
        if ((p == 0 && side == 0) || (p == ne && side == 1)) continue;
        wbasis.eval_element(el.level, el.cell, x, side == 0 ? Side::Left : Side::Right,
                            std::span<double>(t.point_values_[id].data() + (p * 2 + side) * t.p_, t.p_));
      }
    }
  }
  return t;
}

std::span<const double> WeightTables1D::point_values(int id, int point, int side) const {
  return std::span<const double>(point_values_[id].data() + (static_cast<std::size_t>(point) * 2 + side) * p_, p_);
}

}  // namespace sgdg
