#include "sgdg/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <Eigen/SparseCholesky>

#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"
#include "sgdg/operators1d.hpp"

namespace sgdg {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SGDG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double effective_sigma(const SpaceSpec& space, const SchemeParams& params) {
  if (params.sigma < 0.0 || !std::isfinite(params.sigma)) throw ConfigError("penalty sigma must be positive");
  if (params.drop_tol < 0.0) throw ConfigError("drop tolerance must be non-negative");
  const double s = params.sigma > 0.0 ? params.sigma : default_sigma(space.dim(), space.degree());
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("penalty sigma must be positive");
  return s;
}

namespace {

using Entry = WeightTables1D::Entry;
using TensorMap = std::unordered_map<std::uint64_t, std::vector<double>>;

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// ---------------------------------------------------------------------------
// Coefficient as a sum of products of 1D factors.

struct Model {
  int d = 0;
  int n = 0;
  int p = 1;  // sub-functions per factor id
  int bits = 16;
  bool hierarchical = false;
  std::vector<WeightTables1D> owned;
  std::vector<const WeightTables1D*> tab;
  TensorMap volume;
  std::vector<TensorMap> face;  // [(m * points + point) * 2 + side]
  std::vector<double> dir_scale;
  int points = 0;

  std::uint64_t pack(std::uint64_t key, int pos, int id) const {
    if (id >= (1 << bits)) throw ResourceError("assembly: coefficient factor index does not fit the key");
    return key | (static_cast<std::uint64_t>(id) << (bits * pos));
  }
  const TensorMap& face_map(int m, int point, int side) const { return face[(m * points + point) * 2 + side]; }
};

Model build_model(const SpaceSpec& space, const Problem& prob, const SchemeParams& params) {
  const int d = space.dim();
  const int n = space.max_level();
  const Basis1D basis(space.degree(), space.family());
  Model md;
  md.d = d;
  md.n = n;
  md.bits = std::min(16, 64 / d);
  md.points = (1 << n) + 1;
  md.dir_scale.assign(d, 1.0);
  md.face.assign(static_cast<std::size_t>(d) * md.points * 2, {});
  const int q = space.degree() + 8;

  auto add_face_terms_separable = [&](int nterms) {
    for (int m = 0; m < d; ++m)
      for (int pt = 0; pt < md.points; ++pt)
        for (int s = 0; s < 2; ++s) {
          if ((pt == 0 && s == 0) || (pt == md.points - 1 && s == 1)) continue;
          for (int t = 0; t < nterms; ++t) {
            const double v = md.tab[m]->point_values(t, pt, s)[0];
            if (v == 0.0) continue;
            std::uint64_t key = 0;
            int pos = 0;
            for (int mm = 0; mm < d; ++mm)
              if (mm != m) key = md.pack(key, pos++, t);
            auto& slot = md.face[(m * md.points + pt) * 2 + s][key];
            if (slot.empty()) slot.assign(1, 0.0);
            slot[0] += v;
          }
        }
  };

  switch (prob.K.kind) {
    case Coefficient::Kind::Constant: {
      if (static_cast<int>(prob.K.diagonal.size()) != d) throw ConfigError("coefficient size does not match space");
      md.owned.push_back(WeightTables1D::from_functions(basis, n, {Weight1D::constant(1.0)}, q));
      md.tab.assign(d, &md.owned[0]);
      md.dir_scale = prob.K.diagonal;
      md.volume[0] = {1.0};
      add_face_terms_separable(1);
      break;
    }
    case Coefficient::Kind::SeparableSum: {
      const int nt = static_cast<int>(prob.K.terms.size());
      md.owned.reserve(d);
      for (int m = 0; m < d; ++m) {
        std::vector<Weight1D> ws;
        for (const auto& t : prob.K.terms) ws.push_back(t.at(m));
        md.owned.push_back(WeightTables1D::from_functions(basis, n, ws, q));
      }
      for (int m = 0; m < d; ++m) md.tab.push_back(&md.owned[m]);
      for (int t = 0; t < nt; ++t) {
        std::uint64_t key = 0;
        for (int m = 0; m < d; ++m) key = md.pack(key, m, t);
        auto& slot = md.volume[key];
        if (slot.empty()) slot.assign(1, 0.0);
        slot[0] += 1.0;
      }
      add_face_terms_separable(nt);
      break;
    }
    case Coefficient::Kind::General: {
      const int kdeg = 2 * space.degree();
      if (kdeg > kMaxAlpertDegree) throw ConfigError("coefficient projection degree 2k exceeds the supported degree");
      const CoefficientExpansion exp = project_coefficient(prob.K.general, d, n, kdeg, params.quad);
      md.hierarchical = true;
      md.p = kdeg + 1;
      md.owned.push_back(WeightTables1D::from_hierarchy(basis, n, kdeg));
      md.tab.assign(d, &md.owned[0]);
      const int pd = ipow(md.p, d);
      for (const auto& el : exp.space.elements()) {
        std::vector<double> c(exp.coeffs.begin() + el.first_dof, exp.coeffs.begin() + el.first_dof + pd);
        if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; })) continue;
        std::uint64_t key = 0;
        for (int m = 0; m < d; ++m) key = md.pack(key, m, el.e1d[m]);
        md.volume[key] = std::move(c);
      }
      // Restrictions of K_h to the finest-grid faces x_m = point, one side.
      const int pt1 = ipow(md.p, d - 1);
      for (const auto& [key, c] : md.volume) {
        std::vector<int> ids(d);
        for (int m = 0; m < d; ++m) ids[m] = static_cast<int>((key >> (md.bits * m)) & ((1ull << md.bits) - 1));
        for (int m = 0; m < d; ++m) {
          const auto el = element_of(ids[m]);
          int lo = 0;
          int hi = md.points - 1;
          if (el.level > 0) {
            const int width = 1 << (n - el.level + 1);
            lo = el.cell * width;
            hi = lo + width;
          }
          std::uint64_t tkey = 0;
          int pos = 0;
          for (int mm = 0; mm < d; ++mm)
            if (mm != m) tkey = md.pack(tkey, pos++, ids[mm]);
          const int outer = ipow(md.p, m);
          const int inner = ipow(md.p, d - 1 - m);
          for (int pt = lo; pt <= hi; ++pt)
            for (int s = 0; s < 2; ++s) {
              if ((pt == 0 && s == 0) || (pt == md.points - 1 && s == 1)) continue;
              const auto vals = md.tab[m]->point_values(ids[m], pt, s);
              if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; })) continue;
              auto& slot = md.face[(m * md.points + pt) * 2 + s][tkey];
              if (slot.empty()) slot.assign(pt1, 0.0);
              for (int o = 0; o < outer; ++o)
                for (int qq = 0; qq < md.p; ++qq) {
                  const double v = vals[qq];
                  if (v == 0.0) continue;
                  const double* src = c.data() + (o * md.p + qq) * inner;
                  double* dst = slot.data() + o * inner;
                  for (int i = 0; i < inner; ++i) dst[i] += v * src[i];
                }
            }
        }
      }
      break;
    }
  }
  return md;
}

// ---------------------------------------------------------------------------
// Sum-factorized contraction of a factor expansion with per-dimension blocks.

// X[o, b, i] += scale * sum_p F[p, b] Y[o, p, i]
void contract_add(const double* y, const double* f, double* x, int outer, int inner, int p, int b, double scale) {
  for (int o = 0; o < outer; ++o)
    for (int pp = 0; pp < p; ++pp) {
      const double* yp = y + (static_cast<std::size_t>(o) * p + pp) * inner;
      const double* fp = f + pp * b;
      for (int bb = 0; bb < b; ++bb) {
        const double fb = scale * fp[bb];
        if (fb == 0.0) continue;
        double* xp = x + (static_cast<std::size_t>(o) * b + bb) * inner;
        for (int i = 0; i < inner; ++i) xp[i] += fb * yp[i];
      }
    }
}

struct Contraction {
  int nd = 0;
  int p = 1;
  int b = 1;
  int bits = 16;
  bool with_s = false;
  bool prune = false;
  int nmax = 0;
  const TensorMap* map = nullptr;
  std::vector<const std::vector<Entry>*> lists;
  std::vector<double> sscale;
  std::vector<std::vector<double>> acc0, acc1;
  std::vector<char> has1;
  const double* leaf = nullptr;

  void setup(int ndims, int psub, int bsize) {
    nd = ndims;
    p = psub;
    b = bsize;
    lists.assign(nd, nullptr);
    sscale.assign(nd, 1.0);
    acc0.resize(nd + 1);
    acc1.resize(nd + 1);
    has1.assign(nd + 1, 0);
    for (int j = 0; j <= nd; ++j) {
      const std::size_t sz = static_cast<std::size_t>(ipow(p, j)) * ipow(b, nd - j);
      acc0[j].assign(sz, 0.0);
      acc1[j].assign(sz, 0.0);
    }
  }

  // Returns false when no expansion term matches below this depth.
  bool run(int j, std::uint64_t key, int lsum) {
    if (j == nd) {
      const auto it = map->find(key);
      if (it == map->end()) return false;
      leaf = it->second.data();
      return true;
    }
    std::fill(acc0[j].begin(), acc0[j].end(), 0.0);
    if (with_s) std::fill(acc1[j].begin(), acc1[j].end(), 0.0);
    bool any = false;
    bool any1 = false;
    const int outer = ipow(p, j);
    const int inner = ipow(b, nd - j - 1);
    for (const Entry& e : *lists[j]) {
      if (prune && lsum + e.level > nmax) continue;
      if (!run(j + 1, key | (static_cast<std::uint64_t>(e.id) << (bits * j)), lsum + e.level)) continue;
      const double* y0 = j + 1 == nd ? leaf : acc0[j + 1].data();
      contract_add(y0, e.mass, acc0[j].data(), outer, inner, p, b, 1.0);
      if (with_s) {
        if (j + 1 < nd && has1[j + 1]) contract_add(acc1[j + 1].data(), e.mass, acc1[j].data(), outer, inner, p, b, 1.0);
        contract_add(y0, e.stiffness, acc1[j].data(), outer, inner, p, b, sscale[j]);
        any1 = true;
      }
      any = true;
    }
    has1[j] = any1;
    return any;
  }
};

// ---------------------------------------------------------------------------

struct Neighbors1D {
  // [element][level] -> elements at that level
  std::vector<std::vector<std::vector<int>>> overlap, touch;
};

Neighbors1D neighbors(const PairTables1D& pt) {
  const int ne = pt.elements();
  const int n = pt.max_level();
  Neighbors1D nb;
  nb.overlap.assign(ne, std::vector<std::vector<int>>(n + 1));
  nb.touch.assign(ne, std::vector<std::vector<int>>(n + 1));
  for (int a = 0; a < ne; ++a)
    for (int c : pt.coupled(a)) {
      const int lv = element_of(c).level;
      (pt.overlap(a, c) ? nb.overlap : nb.touch)[a][lv].push_back(c);
    }
  return nb;
}

struct LevelIndex {
  std::unordered_map<std::vector<int>, int, VecHash> first_element;

  explicit LevelIndex(const SpaceSpec& space) {
    const auto& els = space.elements();
    for (int i = 0; i < static_cast<int>(els.size()); ++i) {
      std::vector<int> l(els[i].level.entries().begin(), els[i].level.entries().end());
      first_element.emplace(std::move(l), i);
    }
  }

  int element(const std::vector<int>& level, const std::vector<int>& e1d) const {
    const auto it = first_element.find(level);
    if (it == first_element.end()) return -1;
    int idx = 0;
    for (std::size_t m = 0; m < level.size(); ++m) idx = idx * cells_at_level(level[m]) + element_of(e1d[m]).cell;
    return it->second + idx;
  }
};

struct Assembler {
  const SpaceSpec& space;
  const Model& md;
  const PairTables1D& pt;
  const Neighbors1D& nb;
  const LevelIndex& li;
  double penalty;  // sigma / h
  int d, k1, bsz, blk;
  std::vector<std::vector<int>> digits;           // full block index -> per-dim B index
  std::vector<std::vector<int>> tangential_index;  // [m][full index]
  std::vector<int> rowpart, colpart;               // poly -> block offset
  std::vector<std::vector<int>> col_levels;        // admissible levels of the space

  Assembler(const SpaceSpec& s, const Model& m, const PairTables1D& p, const Neighbors1D& n, const LevelIndex& l,
            double pen)
      : space(s), md(m), pt(p), nb(n), li(l), penalty(pen) {
    d = space.dim();
    k1 = space.degree() + 1;
    bsz = k1 * k1;
    blk = ipow(bsz, d);
    digits.assign(blk, std::vector<int>(d));
    tangential_index.assign(d, std::vector<int>(blk));
    for (int idx = 0; idx < blk; ++idx) {
      int rem = idx;
      for (int m = d - 1; m >= 0; --m) {
        digits[idx][m] = rem % bsz;
        rem /= bsz;
      }
      for (int m = 0; m < d; ++m) {
        int t = 0;
        for (int mm = 0; mm < d; ++mm)
          if (mm != m) t = t * bsz + digits[idx][mm];
        tangential_index[m][idx] = t;
      }
    }
    for (const auto& poly : space.polys()) {
      int r = 0, c = 0;
      for (int m = 0; m < d; ++m) {
        r = r * bsz + poly[m] * k1;
        c = c * bsz + poly[m];
      }
      rowpart.push_back(r);
      colpart.push_back(c);
    }
    for (const auto& l : space.levels()) col_levels.emplace_back(l.entries().begin(), l.entries().end());
  }

  // Column elements (index >= row) coupled to the row element.
  void candidates(int row, std::vector<int>& out) const {
    out.clear();
    const auto& er = space.elements()[row];
    std::vector<int> e1d(d);
    for (const auto& lev : col_levels) {
      // DFS over dims, at most one touching dimension
      auto rec = [&](auto&& self, int m, bool touched) -> void {
        if (m == d) {
          const int idx = li.element(lev, e1d);
          if (idx >= row) out.push_back(idx);
          return;
        }
        const int a = er.e1d[m];
        for (int c : nb.overlap[a][lev[m]]) {
          e1d[m] = c;
          self(self, m + 1, touched);
        }
        if (!touched)
          for (int c : nb.touch[a][lev[m]]) {
            e1d[m] = c;
            self(self, m + 1, true);
          }
      };
      rec(rec, 0, false);
    }
    std::sort(out.begin(), out.end());
  }

  struct Scratch {
    Contraction vol, tan;
    std::vector<double> block;
  };

  void init_scratch(Scratch& s) const {
    s.vol.setup(d, md.p, bsz);
    s.vol.bits = md.bits;
    s.vol.with_s = true;
    s.vol.prune = md.hierarchical;
    s.vol.nmax = md.n;
    s.vol.map = &md.volume;
    for (int m = 0; m < d; ++m) s.vol.sscale[m] = md.dir_scale[m];
    s.tan.setup(d - 1, md.p, bsz);
    s.tan.bits = md.bits;
    s.tan.prune = md.hierarchical;
    s.tan.nmax = md.n;
    s.block.assign(blk, 0.0);
  }

  // Full (k+1)^{2d} block of B(phi_c, phi_r) for row element r, column element c.
  bool pair_block(int row, int col, Scratch& s) const {
    const auto& er = space.elements()[row].e1d;
    const auto& ec = space.elements()[col].e1d;
    int nonoverlap = 0;
    int mstar = -1;
    for (int m = 0; m < d; ++m)
      if (!pt.overlap(er[m], ec[m])) {
        ++nonoverlap;
        mstar = m;
      }
    if (nonoverlap >= 2) return false;
    std::fill(s.block.begin(), s.block.end(), 0.0);
    bool any = false;

    if (nonoverlap == 0) {
      for (int m = 0; m < d; ++m) s.vol.lists[m] = &md.tab[m]->entries(er[m], ec[m]);
      if (s.vol.run(0, 0, 0) && s.vol.has1[0]) {
        for (int i = 0; i < blk; ++i) s.block[i] += s.vol.acc1[0][i];
        any = true;
      }
    }

    for (int m = 0; m < d; ++m) {
      if (nonoverlap == 1 && m != mstar) continue;
      // flux terms -(E + E^T)
      const auto& fps = pt.face_points(er[m], ec[m]);
      if (!fps.empty()) {
        int pos = 0;
        for (int mm = 0; mm < d; ++mm)
          if (mm != m) s.tan.lists[pos++] = &md.tab[mm]->entries(er[mm], ec[mm]);
        for (const auto& fp : fps) {
          const TensorMap& fmap = md.face_map(m, fp.point, fp.side);
          if (fmap.empty()) continue;
          s.tan.map = &fmap;
          const double* t = nullptr;
          if (d == 1) {
            const auto it = fmap.find(0);
            if (it == fmap.end()) continue;
            t = it->second.data();
          } else {
            if (!s.tan.run(0, 0, 0)) continue;
            t = s.tan.acc0[0].data();
          }
          const double sc = -md.dir_scale[m];
          for (int i = 0; i < blk; ++i) s.block[i] += sc * fp.alpha[s.block.size() ? digits[i][m] : 0] * t[tangential_index[m][i]];
          any = true;
        }
      }
      // penalty
      if (const double* jb = pt.jump(er[m], ec[m])) {
        bool ok = true;
        std::vector<const double*> mass(d, nullptr);
        for (int mm = 0; mm < d && ok; ++mm)
          if (mm != m) {
            mass[mm] = pt.mass(er[mm], ec[mm]);
            ok = mass[mm] != nullptr;
          }
        if (ok) {
          for (int i = 0; i < blk; ++i) {
            double v = penalty * jb[digits[i][m]];
            for (int mm = 0; mm < d && v != 0.0; ++mm)
              if (mm != m) v *= mass[mm][digits[i][mm]];
            s.block[i] += v;
          }
          any = true;
        }
      }
    }
    return any;
  }
};

struct RowChunk {
  std::vector<std::int64_t> ptr{0};
  std::vector<int> cols;
  std::vector<double> vals;
};

}  // namespace

SparseSym assemble_matrix(const SpaceSpec& space, const Problem& prob, const SchemeParams& params) {
  if (prob.dim != space.dim()) throw ConfigError("problem and space dimensions differ");
  const int d = space.dim();
  const double sigma = effective_sigma(space, params);
  const double h = space.mesh_size();
  const Basis1D basis(space.degree(), space.family());
  const PairTables1D pt(basis, space.max_level());
  const Neighbors1D nb = neighbors(pt);
  const LevelIndex li(space);
  const Model md = build_model(space, prob, params);
  const Assembler as(space, md, pt, nb, li, sigma / h);
  (void)d;

  const int nel = static_cast<int>(space.elements().size());
  const int npoly = static_cast<int>(space.polys().size());
  const int threads = std::min(resolve_threads(params.threads), std::max(1, nel));
  const int chunk_size = std::max(1, nel / (threads * 32));
  const int nchunks = (nel + chunk_size - 1) / chunk_size;
  std::vector<RowChunk> chunks(nchunks);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    try {
      Assembler::Scratch sc;
      as.init_scratch(sc);
      std::vector<int> cand;
      std::vector<std::pair<int, std::vector<double>>> blocks;
      while (true) {
        const int ci = next.fetch_add(1);
        if (ci >= nchunks) break;
        RowChunk& out = chunks[ci];
        const int r0 = ci * chunk_size;
        const int r1 = std::min(nel, r0 + chunk_size);
        for (int row = r0; row < r1; ++row) {
          as.candidates(row, cand);
          blocks.clear();
          for (int col : cand) {
            if (!as.pair_block(row, col, sc)) continue;
            std::vector<double> sub(static_cast<std::size_t>(npoly) * npoly);
            for (int a = 0; a < npoly; ++a)
              for (int b = 0; b < npoly; ++b) sub[a * npoly + b] = sc.block[as.rowpart[a] + as.colpart[b]];
            blocks.emplace_back(col, std::move(sub));
          }
          const int first_row = space.elements()[row].first_dof;
          for (int a = 0; a < npoly; ++a) {
            for (const auto& [col, sub] : blocks) {
              const int first_col = space.elements()[col].first_dof;
              for (int b = 0; b < npoly; ++b) {
                const int c = first_col + b;
                if (c < first_row + a) continue;
                const double v = sub[a * npoly + b];
                if (v == 0.0) continue;
                out.cols.push_back(c);
                out.vals.push_back(v);
              }
            }
            out.ptr.push_back(static_cast<std::int64_t>(out.cols.size()));
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(err_mutex);
      if (!error) error = std::current_exception();
      next.store(nchunks);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  SparseSym a(space.size());
  int row = 0;
  for (auto& c : chunks) {
    const int rows = static_cast<int>(c.ptr.size()) - 1;
    a.append_rows(c.ptr, std::move(c.cols), std::move(c.vals), row);
    row += rows;
    c = RowChunk{};
  }
  if (params.drop_tol > 0.0) return a.dropped(params.drop_tol * a.max_abs());
  return a;
}

// ---------------------------------------------------------------------------

namespace {

// int_0^1 h(x) phi_{e,i}(x) dx for every 1D hierarchical function up to level N.
std::vector<double> moments_1d(const Basis1D& basis, int n, const std::function<double(double)>& f) {
  const int k1 = basis.per_element();
  std::vector<double> out(hierarchy_size(n, basis.degree()), 0.0);
  const auto& rule = gauss_rule_cached(basis.degree() + 12);
  const double h = std::ldexp(1.0, -n);
  std::vector<double> vals(k1);
  for (int c = 0; c < (1 << n); ++c) {
    const auto chain = element_chain(n, c);
    for (int q = 0; q < rule.size(); ++q) {
      const double x = (c + rule.nodes[q]) * h;
      const double w = rule.weights[q] * h * f(x);
      if (!std::isfinite(w)) throw IntegrationError("non-finite sample in a separable integrand");
      if (w == 0.0) continue;
      for (int e : chain) {
        const auto el = element_of(e);
        basis.eval_element(el.level, el.cell, x, Side::Left, vals);
        for (int i = 0; i < k1; ++i) out[e * k1 + i] += w * vals[i];
      }
    }
  }
  return out;
}

// Whether the element has a nonzero trace on the boundary x_m = side.
bool touches(const SpaceElement& el, int m, int side) {
  if (el.level[m] == 0) return true;
  return side == 0 ? el.cell[m] == 0 : el.cell[m] == cells_at_level(el.level[m]) - 1;
}

}  // namespace

std::vector<double> assemble_rhs(const SpaceSpec& space, const Problem& prob, const SchemeParams& params) {
  if (prob.dim != space.dim()) throw ConfigError("problem and space dimensions differ");
  prob.validate();
  const int d = space.dim();
  const int n = space.max_level();
  const int k1 = space.degree() + 1;
  const double penalty = effective_sigma(space, params) / space.mesh_size();
  const Basis1D basis(space.degree(), space.family());
  const auto& polys = space.polys();
  std::vector<double> b(space.size(), 0.0);

  // source term
  if (prob.f_separable) {
    for (const auto& term : *prob.f_separable) {
      std::vector<std::vector<double>> mom;
      for (int m = 0; m < d; ++m) mom.push_back(moments_1d(basis, n, term.factors[m]));
      for (const auto& el : space.elements())
        for (std::size_t p = 0; p < polys.size(); ++p) {
          double v = term.coef;
          for (int m = 0; m < d && v != 0.0; ++m) v *= mom[m][el.e1d[m] * k1 + polys[p][m]];
          b[el.first_dof + p] += v;
        }
    }
  } else {
    for (const auto& el : space.elements()) {
      const auto v = integrate_against_element(prob.f, el.level, el.cell, polys, basis, params.quad);
      for (std::size_t p = 0; p < polys.size(); ++p) b[el.first_dof + p] += v[p];
    }
  }

  // boundary terms: - int (K grad phi . n - sigma/h phi) g, consistent with the symmetric form
  const bool separable_k = prob.K.kind != Coefficient::Kind::General;
  if (prob.g_separable && prob.g_separable->empty()) return b;
  if (prob.g_separable && separable_k) {
    // K terms as 1D factors with per-direction scale
    std::vector<std::vector<Weight1D>> kterms;
    std::vector<double> scale(d, 1.0);
    if (prob.K.kind == Coefficient::Kind::Constant) {
      kterms.push_back(std::vector<Weight1D>(d, Weight1D::constant(1.0)));
      scale = prob.K.diagonal;
    } else {
      kterms = prob.K.terms;
    }
    std::vector<double> tv(k1), td(k1);
    for (const auto& gt : *prob.g_separable) {
      std::vector<std::vector<double>> gmom;
      for (int m = 0; m < d; ++m) gmom.push_back(moments_1d(basis, n, gt.factors[m]));
      std::vector<std::vector<std::vector<double>>> kgmom(kterms.size());
      for (std::size_t t = 0; t < kterms.size(); ++t)
        for (int m = 0; m < d; ++m) {
          const Weight1D& kf = kterms[t][m];
          const auto& gf = gt.factors[m];
          kgmom[t].push_back(moments_1d(basis, n, [&](double x) { return kf(x, Side::Left) * gf(x); }));
        }
      for (int m = 0; m < d; ++m)
        for (int side = 0; side < 2; ++side) {
          const double xb = side;
          const Side inside = side == 0 ? Side::Right : Side::Left;
          const double normal = side == 0 ? -1.0 : 1.0;
          const double gm = gt.factors[m](xb);
          if (gm == 0.0) continue;
          for (const auto& el : space.elements()) {
            if (!touches(el, m, side)) continue;
            basis.eval_element(el.level[m], el.cell[m], xb, inside, tv, td);
            for (std::size_t p = 0; p < polys.size(); ++p) {
              const int im = polys[p][m];
              double pen = penalty * tv[im];
              for (int mm = 0; mm < d && pen != 0.0; ++mm)
                if (mm != m) pen *= gmom[mm][el.e1d[mm] * k1 + polys[p][mm]];
              double flux = 0.0;
              for (std::size_t t = 0; t < kterms.size(); ++t) {
                double v = scale[m] * kterms[t][m](xb, inside) * td[im] * normal;
                for (int mm = 0; mm < d && v != 0.0; ++mm)
                  if (mm != m) v *= kgmom[t][mm][el.e1d[mm] * k1 + polys[p][mm]];
                flux += v;
              }
              b[el.first_dof + p] -= gt.coef * gm * (flux - pen);
            }
          }
        }
    }
    return b;
  }

  const ScalarField g = prob.g ? prob.g : ScalarField([&](std::span<const double> x) {
    return eval_separable(*prob.g_separable, x);
  });
  for (int m = 0; m < d; ++m) {
    const double ks = prob.K.kind == Coefficient::Kind::Constant ? prob.K.diagonal[m] : 1.0;
    const ScalarField kappa = [&](std::span<const double> x) { return ks * prob.K.eval(x); };
    for (int side = 0; side < 2; ++side)
      for (const auto& el : space.elements()) {
        if (!touches(el, m, side)) continue;
        const auto v =
            integrate_boundary_element(g, {m, side}, el.level, el.cell, polys, basis, kappa, -penalty, params.quad);
        for (std::size_t p = 0; p < polys.size(); ++p) b[el.first_dof + p] -= v[p];
      }
  }
  return b;
}

AssembledSystem assemble(const SpaceSpec& space, const Problem& prob, const SchemeParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  AssembledSystem sys;
  sys.A = assemble_matrix(space, prob, params);
  sys.b = assemble_rhs(space, prob, params);
  sys.sigma = effective_sigma(space, params);
  sys.dim = space.dim();
  sys.max_level = space.max_level();
  sys.degree = space.degree();
  sys.kind = space.kind();
  sys.assemble_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sys;
}

SparseSym mass_matrix(const SpaceSpec& space, int threads) {
  (void)threads;
  const int d = space.dim();
  const int k1 = space.degree() + 1;
  const Basis1D basis(space.degree(), space.family());
  const PairTables1D pt(basis, space.max_level());
  const Neighbors1D nb = neighbors(pt);
  const LevelIndex li(space);
  const auto& polys = space.polys();
  const int npoly = static_cast<int>(polys.size());
  SparseSym out(space.size());
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<std::pair<int, std::vector<double>>> blocks;
  std::vector<int> e1d(d);
  for (int row = 0; row < static_cast<int>(space.elements().size()); ++row) {
    const auto& er = space.elements()[row];
    blocks.clear();
    for (const auto& lev : space.levels()) {
      std::vector<int> lv(lev.entries().begin(), lev.entries().end());
      auto rec = [&](auto&& self, int m) -> void {
        if (m == d) {
          const int col = li.element(lv, e1d);
          if (col < row) return;
          std::vector<double> sub(static_cast<std::size_t>(npoly) * npoly);
          bool any = false;
          for (int a = 0; a < npoly; ++a)
            for (int b = 0; b < npoly; ++b) {
              double v = 1.0;
              for (int mm = 0; mm < d && v != 0.0; ++mm) {
                const double* mb = pt.mass(er.e1d[mm], e1d[mm]);
                v *= mb ? mb[polys[a][mm] * k1 + polys[b][mm]] : 0.0;
              }
              sub[a * npoly + b] = v;
              any = any || v != 0.0;
            }
          if (any) blocks.emplace_back(col, std::move(sub));
          return;
        }
        for (int c : nb.overlap[er.e1d[m]][lv[m]]) {
          e1d[m] = c;
          self(self, m + 1);
        }
      };
      rec(rec, 0);
    }
    std::sort(blocks.begin(), blocks.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (int a = 0; a < npoly; ++a) {
      cols.clear();
      vals.clear();
      const int r = er.first_dof + a;
      for (const auto& [col, sub] : blocks) {
        const int first_col = space.elements()[col].first_dof;
        for (int b = 0; b < npoly; ++b) {
          if (first_col + b < r) continue;
          const double v = sub[a * npoly + b];
          if (v == 0.0) continue;
          cols.push_back(first_col + b);
          vals.push_back(v);
        }
      }
      out.append_row(r, cols, vals);
    }
  }
  return out;
}

std::vector<double> l2_project_function(const ScalarField& u, const SpaceSpec& space, const QuadConfig& quad) {
  const Basis1D basis(space.degree(), space.family());
  std::vector<double> rhs(space.size(), 0.0);
  for (const auto& el : space.elements()) {
    const auto v = integrate_against_element(u, el.level, el.cell, space.polys(), basis, quad);
    std::copy(v.begin(), v.end(), rhs.begin() + el.first_dof);
  }
  if (space.family() == Family::Orthonormal) return rhs;

  const SparseSym g = mass_matrix(space);
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < g.dim(); ++r)
    for (auto p = g.row_ptr()[r]; p < g.row_ptr()[r + 1]; ++p) {
      trips.emplace_back(r, g.cols()[p], g.values()[p]);
      if (g.cols()[p] != r) trips.emplace_back(g.cols()[p], r, g.values()[p]);
    }
  Eigen::SparseMatrix<double> gm(g.dim(), g.dim());
  gm.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gm);
  if (ldlt.info() != Eigen::Success)
    throw SolveError(SolveError::Reason::Breakdown, "Gram matrix factorization failed", 0.0);
  const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
  Eigen::VectorXd c = ldlt.solve(rv);
  // two steps of iterative refinement
  for (int it = 0; it < 2; ++it) c += ldlt.solve(rv - gm * c);
  const double res = (gm * c - rv).norm() / std::max(rv.norm(), 1e-300);
  if (ldlt.info() != Eigen::Success || !(res < 1e-8))
    throw SolveError(SolveError::Reason::Breakdown, "Gram system is ill-conditioned (residual " + std::to_string(res) + ")",
                     0.0);
  return {c.data(), c.data() + c.size()};
}

}  // namespace sgdg
