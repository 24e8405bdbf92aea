#include "sgdg/postproc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "sgdg/error.hpp"
#include "sgdg/gauss.hpp"

namespace sgdg {

namespace {

Side clamp_side(double x, Side side) {
  if (x <= 0.0) return Side::Right;
  if (x >= 1.0) return Side::Left;
  return side;
}

// Runs body(i) for i in [0, n) on `threads` workers taking chunks in order.
template <class F>
void parallel_chunks(int n, int threads, F&& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mu;
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

DiscreteFunction::DiscreteFunction(const SpaceSpec& s, std::vector<double> c) : space(&s), coeffs(std::move(c)) {
  if (static_cast<int>(coeffs.size()) != s.size()) throw ConfigError("coefficient vector does not match the space");
}

Evaluator::Evaluator(const SpaceSpec& space) : space_(&space), basis_(space.degree(), space.family()) {
  const auto& els = space.elements();
  std::size_t li = 0;
  for (int i = 0; i < static_cast<int>(els.size()); ++i) {
    if (li < space.levels().size() && els[i].level == space.levels()[li]) {
      level_first_.push_back(i);
      ++li;
    }
  }
  if (level_first_.size() != space.levels().size()) throw ConfigError("space elements are not grouped by level");
}

double Evaluator::value(std::span<const double> coeffs, std::span<const double> x, Side side) const {
  return value_grad(coeffs, x, {}, side);
}

double Evaluator::value_grad(std::span<const double> coeffs, std::span<const double> x, std::span<double> grad,
                             Side side) const {
  const int d = space_->dim();
  const int n = space_->max_level();
  const int k1 = space_->degree() + 1;
  const bool want_grad = !grad.empty();
  // 1D values per (dim, level)
  std::vector<double> vals(static_cast<std::size_t>(d) * (n + 1) * k1), ders(vals.size());
  std::vector<int> cells(static_cast<std::size_t>(d) * (n + 1));
  for (int m = 0; m < d; ++m) {
    const Side s = clamp_side(x[m], side);
    for (int l = 0; l <= n; ++l) {
      const int c = l == 0 ? 0 : locate_cell(l, x[m], s) / 2;
      cells[m * (n + 1) + l] = c;
      std::span<double> v(vals.data() + (m * (n + 1) + l) * k1, k1);
      std::span<double> dv(ders.data() + (m * (n + 1) + l) * k1, k1);
      basis_.eval_element(l, c, x[m], s, v, want_grad ? dv : std::span<double>{});
    }
  }
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const auto& polys = space_->polys();
  const int npoly = static_cast<int>(polys.size());
  double total = 0.0;
  const auto& levels = space_->levels();
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const MultiIndex& lev = levels[li];
    int idx = 0;
    for (int m = 0; m < d; ++m) idx = idx * cells_at_level(lev[m]) + cells[m * (n + 1) + lev[m]];
    const int first = space_->elements()[level_first_[li] + idx].first_dof;
    for (int p = 0; p < npoly; ++p) {
      const double c = coeffs[first + p];
      if (c == 0.0) continue;
      double v = c;
      for (int m = 0; m < d; ++m) v *= vals[(m * (n + 1) + lev[m]) * k1 + polys[p][m]];
      total += v;
      if (want_grad)
        for (int g = 0; g < d; ++g) {
          double w = c;
          for (int m = 0; m < d && w != 0.0; ++m) {
            const std::size_t at = (m * (n + 1) + lev[m]) * k1 + polys[p][m];
            w *= m == g ? ders[at] : vals[at];
          }
          grad[g] += w;
        }
    }
  }
  return total;
}

double eval_discrete(const DiscreteFunction& u, std::span<const double> x, Side side) {
  return Evaluator(*u.space).value(u.coeffs, x, side);
}

double eval_discrete_grad(const DiscreteFunction& u, std::span<const double> x, std::span<double> grad, Side side) {
  return Evaluator(*u.space).value_grad(u.coeffs, x, grad, side);
}

double coefficient_norm_sq(std::span<const double> coeffs) {
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  return s;
}

std::vector<double> full_grid_coefficients(const DiscreteFunction& u, int threads) {
  const SpaceSpec& space = *u.space;
  const int d = space.dim();
  const int n = space.max_level();
  const int k = space.degree();
  const int k1 = k + 1;
  const int mm = (1 << n) * k1;
  const std::int64_t total = full_grid_dim(d, n, k);
  if (total > (std::int64_t{1} << 31)) throw ResourceError("full-grid representation is too large");
  const Basis1D basis(k, space.family());

  // 1D transform: hierarchical (element, poly) -> finest (cell, degree), by columns
  struct Col {
    std::vector<int> rows;
    std::vector<double> vals;
  };
  std::vector<Col> cols(mm);
  const auto& rule = gauss_rule_cached(k1 + 1);
  const double h = std::ldexp(1.0, -n);
  std::vector<double> pv(k1), pd(k1), bv(k1);
  for (int e = 0; e < (1 << n); ++e) {
    const Element1D el = element_of(e);
    const int width = el.level == 0 ? (1 << n) : (1 << (n - el.level + 1));
    const int c0 = el.level == 0 ? 0 : el.cell * width;
    for (int c = c0; c < c0 + width; ++c) {
      std::vector<double> block(k1 * k1, 0.0);  // [q][p]
      for (int g = 0; g < rule.size(); ++g) {
        const double t = rule.nodes[g];
        const double x = (c + t) * h;
        legendre_values(k, 2.0 * t - 1.0, pv, pd);
        basis.eval_element(el.level, el.cell, x, Side::Left, bv);
        for (int q = 0; q < k1; ++q) {
          const double lq = std::sqrt((2.0 * q + 1.0) / h) * pv[q];
          for (int p = 0; p < k1; ++p) block[q * k1 + p] += rule.weights[g] * h * lq * bv[p];
        }
      }
      for (int p = 0; p < k1; ++p)
        for (int q = 0; q < k1; ++q) {
          const double v = block[q * k1 + p];
          if (std::abs(v) < 1e-15) continue;
          cols[e * k1 + p].rows.push_back(c * k1 + q);
          cols[e * k1 + p].vals.push_back(v);
        }
    }
  }

  std::vector<double> x(total, 0.0);
  for (const auto& el : space.elements())
    for (std::size_t p = 0; p < space.polys().size(); ++p) {
      std::int64_t idx = 0;
      for (int m = 0; m < d; ++m) idx = idx * mm + el.e1d[m] * k1 + space.polys()[p][m];
      x[idx] = u.coeffs[el.first_dof + p];
    }

  for (int m = 0; m < d; ++m) {
    std::int64_t inner = 1;
    for (int j = m + 1; j < d; ++j) inner *= mm;
    const std::int64_t outer = total / (inner * mm);
    const std::int64_t fibers = outer * inner;
    const int nchunks = static_cast<int>(std::min<std::int64_t>(fibers, 4096));
    parallel_chunks(nchunks, threads, [&](int ci) {
      std::vector<double> in(mm), out(mm);
      const std::int64_t f0 = fibers * ci / nchunks;
      const std::int64_t f1 = fibers * (ci + 1) / nchunks;
      for (std::int64_t f = f0; f < f1; ++f) {
        const std::int64_t o = f / inner;
        const std::int64_t i = f % inner;
        double* base = x.data() + o * mm * inner + i;
        bool any = false;
        for (int j = 0; j < mm; ++j) {
          in[j] = base[j * inner];
          any = any || in[j] != 0.0;
        }
        if (!any) continue;
        std::fill(out.begin(), out.end(), 0.0);
        for (int j = 0; j < mm; ++j) {
          if (in[j] == 0.0) continue;
          const Col& c = cols[j];
          for (std::size_t r = 0; r < c.rows.size(); ++r) out[c.rows[r]] += c.vals[r] * in[j];
        }
        for (int j = 0; j < mm; ++j) base[j * inner] = out[j];
      }
    });
  }
  return x;
}

namespace {

// out[o, i, r] = sum_q t[i * nin + q] in[o, q, r]
void apply_dim(const double* in, double* out, const double* t, int outer, int nin, int nout, int inner) {
  for (int o = 0; o < outer; ++o) {
    const double* blk = in + static_cast<std::size_t>(o) * nin * inner;
    for (int i = 0; i < nout; ++i) {
      double* dst = out + (static_cast<std::size_t>(o) * nout + i) * inner;
      const double* ti = t + i * nin;
      if (inner == 1) {
        double s = 0.0;
        for (int q = 0; q < nin; ++q) s += ti[q] * blk[q];
        *dst = s;
        continue;
      }
      for (int r = 0; r < inner; ++r) dst[r] = ti[0] * blk[r];
      for (int q = 1; q < nin; ++q) {
        const double* src = blk + static_cast<std::size_t>(q) * inner;
        for (int r = 0; r < inner; ++r) dst[r] += ti[q] * src[r];
      }
    }
  }
}

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

struct Partial {
  double l1 = 0.0, l2 = 0.0, linf = 0.0, semi = 0.0, face_flux = 0.0, face_jump = 0.0;
};

}  // namespace

namespace {

ErrorReport norms(const DiscreteFunction& uh, const ScalarField& exact, const VectorField& exact_grad,
                  const std::vector<SeparableProduct>* separable, const ErrorOptions& opts) {
  const SpaceSpec& space = *uh.space;
  const int d = space.dim();
  const int n = space.max_level();
  const int k = space.degree();
  const int k1 = k + 1;
  const int mm = (1 << n) * k1;
  const int q = opts.points > 0 ? opts.points : std::max(6, k + 3);
  const int cells1d = 1 << n;
  const double h = 1.0 / cells1d;
  if (!exact || !exact_grad) throw ConfigError("error norms need the exact solution and its gradient");

  const std::vector<double> fg = full_grid_coefficients(uh, opts.threads);
  const auto& rule = gauss_rule_cached(q);

  // 1D tables on the reference cell: q Gauss points plus the center, and the two ends
  const int np = q + 1;
  std::vector<double> tv(np * k1), td(np * k1), ends_v(2 * k1), ends_d(2 * k1);
  std::vector<double> pv(k1), pd(k1);
  auto fill = [&](double t, double* v, double* dv) {
    legendre_values(k, 2.0 * t - 1.0, pv, pd);
    for (int p = 0; p < k1; ++p) {
      const double s = std::sqrt((2.0 * p + 1.0) / h);
      v[p] = s * pv[p];
      dv[p] = s * pd[p] * 2.0 / h;
    }
  };
  for (int i = 0; i < q; ++i) fill(rule.nodes[i], &tv[i * k1], &td[i * k1]);
  fill(0.5, &tv[q * k1], &td[q * k1]);
  fill(0.0, &ends_v[0], &ends_d[0]);
  fill(1.0, &ends_v[k1], &ends_d[k1]);

  const int npts = ipow(q, d);
  // separable exact solution: factor values at node i of cell c, row (t * d + m), entry c * np + i
  const int nterms = separable ? static_cast<int>(separable->size()) : 0;
  std::vector<double> fv, fd;
  if (separable) {
    const std::size_t row = static_cast<std::size_t>(cells1d) * np;
    fv.resize(nterms * d * row);
    fd.resize(nterms * d * row);
    for (int t = 0; t < nterms; ++t) {
      const SeparableProduct& sp = (*separable)[t];
      if (static_cast<int>(sp.factors.size()) != d || static_cast<int>(sp.derivatives.size()) != d)
        throw ConfigError("separable exact solution has wrong arity");
      for (int m = 0; m < d; ++m)
        for (int c = 0; c < cells1d; ++c)
          for (int i = 0; i < np; ++i) {
            const double x = (c + (i < q ? rule.nodes[i] : 0.5)) * h;
            const std::size_t at = (t * d + m) * row + c * np + i;
            fv[at] = sp.factors[m](x);
            fd[at] = sp.derivatives[m](x);
          }
    }
  }
  // exact values (gdim < 0) or one gradient component on the q^d grid of `cell`, accumulated into out
  auto tabulated = [&](const std::vector<int>& cell, int gdim, std::vector<double>& out, std::vector<double>& tmp) {
    const std::size_t row = static_cast<std::size_t>(cells1d) * np;
    for (int t = 0; t < nterms; ++t) {
      double* dst = t == 0 ? out.data() : tmp.data();
      dst[0] = (*separable)[t].coef;
      std::size_t len = 1;
      for (int m = 0; m < d; ++m) {
        const double* f = (m == gdim ? fd.data() : fv.data()) + (t * d + m) * row + cell[m] * np;
        for (std::size_t j = len; j-- > 0;)
          for (int i = q - 1; i >= 0; --i) dst[j * q + i] = dst[j] * f[i];
        len *= q;
      }
      if (t > 0)
        for (int pt = 0; pt < npts; ++pt) out[pt] += tmp[pt];
    }
  };
  auto tabulated_center = [&](const std::vector<int>& cell) {
    const std::size_t row = static_cast<std::size_t>(cells1d) * np;
    double v = 0.0;
    for (int t = 0; t < nterms; ++t) {
      double prod = (*separable)[t].coef;
      for (int m = 0; m < d; ++m) prod *= fv[(t * d + m) * row + cell[m] * np + q];
      v += prod;
    }
    return v;
  };

  std::int64_t ncell = 1;
  for (int m = 0; m < d; ++m) ncell *= cells1d;
  const std::int64_t cells_per_chunk = std::max<std::int64_t>(1, ncell / 4096);
  const int nchunks = static_cast<int>((ncell + cells_per_chunk - 1) / cells_per_chunk);
  std::vector<Partial> parts(nchunks);
  const int nloc = ipow(k1, d);

  std::vector<std::int64_t> stride(d), offset(nloc);
  for (int m = d - 1; m >= 0; --m) stride[m] = m == d - 1 ? 1 : stride[m + 1] * mm;
  for (int l = 0; l < nloc; ++l) {
    int rem = l;
    for (int m = d - 1; m >= 0; --m) {
      offset[l] += (rem % k1) * stride[m];
      rem /= k1;
    }
  }
  auto gather = [&](const std::vector<int>& cell, std::vector<double>& loc) {
    std::int64_t base = 0;
    for (int m = 0; m < d; ++m) base += static_cast<std::int64_t>(cell[m]) * k1 * stride[m];
    for (int l = 0; l < nloc; ++l) loc[l] = fg[base + offset[l]];
  };
  // Evaluates the local expansion on the tensor grid of 1D rows `tabs[m]` (rows[m] points each).
  // buf_a and buf_b hold at least scratch_size entries; out holds prod(rows)
  const std::size_t scratch_size = ipow(std::max(q, k1), d);
  auto evaluate = [&](const std::vector<double>& loc, const std::vector<const double*>& tabs,
                      const std::vector<int>& rows, std::vector<double>& buf_a, std::vector<double>& buf_b,
                      std::vector<double>& out) {
    const double* src = loc.data();
    int done = 1;
    for (int m = 0; m < d; ++m) {
      const int inner = ipow(k1, d - m - 1);
      double* dst = m == d - 1 ? out.data() : (m % 2 == 0 ? buf_a.data() : buf_b.data());
      apply_dim(src, dst, tabs[m], done, k1, rows[m], inner);
      done *= rows[m];
      src = dst;
    }
  };

  // node index per coordinate and weight of each point of the q^d cell grid
  std::vector<int> pt_idx(static_cast<std::size_t>(npts) * d);
  std::vector<double> pt_w(npts);
  for (int pt = 0; pt < npts; ++pt) {
    int r = pt;
    double w = 1.0;
    for (int m = d - 1; m >= 0; --m) {
      const int i = r % q;
      r /= q;
      pt_idx[pt * d + m] = i;
      w *= rule.weights[i] * h;
    }
    pt_w[pt] = w;
  }

  parallel_chunks(nchunks, opts.threads, [&](int ci) {
    Partial part;
    std::vector<double> loc(nloc), a(scratch_size), b(scratch_size), val(npts);
    std::vector<std::vector<double>> gradv(d, std::vector<double>(npts));
    std::vector<int> cell(d), rows(d, q), one(d, 1);
    std::vector<double> x(d), g(d), center(1), uex(npts), tmp(npts);
    std::vector<std::vector<double>> gex(d, std::vector<double>(npts));
    std::vector<const double*> tabs(d), ctabs(d, tv.data() + q * k1);
    const std::int64_t c0 = ci * cells_per_chunk;
    const std::int64_t c1 = std::min(ncell, c0 + cells_per_chunk);
    for (std::int64_t c = c0; c < c1; ++c) {
      std::int64_t rem = c;
      for (int m = d - 1; m >= 0; --m) {
        cell[m] = static_cast<int>(rem % cells1d);
        rem /= cells1d;
      }
      gather(cell, loc);
      for (int m = 0; m < d; ++m) tabs[m] = tv.data();
      evaluate(loc, tabs, rows, a, b, val);
      for (int gdim = 0; gdim < d; ++gdim) {
        for (int m = 0; m < d; ++m) tabs[m] = m == gdim ? td.data() : tv.data();
        evaluate(loc, tabs, rows, a, b, gradv[gdim]);
      }
      evaluate(loc, ctabs, one, a, b, center);
      if (separable) {
        tabulated(cell, -1, uex, tmp);
        for (int m = 0; m < d; ++m) tabulated(cell, m, gex[m], tmp);
      } else {
        for (int pt = 0; pt < npts; ++pt) {
          for (int m = 0; m < d; ++m) x[m] = (cell[m] + rule.nodes[pt_idx[pt * d + m]]) * h;
          uex[pt] = exact(x);
          exact_grad(x, g);
          for (int m = 0; m < d; ++m) gex[m][pt] = g[m];
        }
      }
      for (int m = 0; m < d; ++m) x[m] = (cell[m] + 0.5) * h;
      const double uc = separable ? tabulated_center(cell) : exact(x);
      part.linf = std::max(part.linf, std::abs(uc - center[0]));
      double l1 = 0.0, l2 = 0.0, linf = 0.0, semi = 0.0;
      for (int pt = 0; pt < npts; ++pt) {
        const double w = pt_w[pt];
        const double e = uex[pt] - val[pt];
        linf = std::max(linf, std::abs(e));
        l1 += w * std::abs(e);
        l2 += w * e * e;
      }
      for (int m = 0; m < d; ++m)
        for (int pt = 0; pt < npts; ++pt) {
          const double ge = gex[m][pt] - gradv[m][pt];
          semi += pt_w[pt] * ge * ge;
        }
      if (!std::isfinite(l2) || !std::isfinite(semi)) throw IntegrationError("non-finite value in error evaluation");
      part.linf = std::max(part.linf, linf);
      part.l1 += l1;
      part.l2 += l2;
      part.semi += semi;
    }
    parts[ci] = part;
  });

  ErrorReport rep;
  for (const auto& p : parts) {
    rep.l1 += p.l1;
    rep.l2 += p.l2;
    rep.linf = std::max(rep.linf, p.linf);
    rep.h1_semi += p.semi;
  }

  if (opts.energy) {
    // faces x_m = j h; traces from both sides
    double flux = 0.0, jump = 0.0;
    std::int64_t ntan = 1;
    for (int m = 0; m < d - 1; ++m) ntan *= cells1d;
    const int nface_pts = ipow(q, d - 1);
    for (int m = 0; m < d; ++m)
      for (int j = 0; j <= cells1d; ++j) {
        std::vector<double> loc(nloc), a(scratch_size), b(scratch_size);
        std::vector<double> vl(nface_pts), vr(nface_pts), dl(nface_pts), dr(nface_pts);
        std::vector<int> rows(d, q);
        rows[m] = 1;
        std::vector<const double*> tabs(d, tv.data());
        std::vector<double> x(d), g(d);
        for (std::int64_t t = 0; t < ntan; ++t) {
          std::vector<int> tc(d, 0);
          std::int64_t rem = t;
          for (int i = d - 1; i >= 0; --i) {
            if (i == m) continue;
            tc[i] = static_cast<int>(rem % cells1d);
            rem /= cells1d;
          }
          const bool has_left = j > 0, has_right = j < cells1d;
          auto side_eval = [&](int cm, const double* vrow, const double* drow, std::vector<double>& v,
                               std::vector<double>& dv) {
            std::vector<int> cell = tc;
            cell[m] = cm;
            gather(cell, loc);
            tabs.assign(d, tv.data());
            tabs[m] = vrow;
            evaluate(loc, tabs, rows, a, b, v);
            tabs[m] = drow;
            evaluate(loc, tabs, rows, a, b, dv);
          };
          if (has_left) side_eval(j - 1, &ends_v[k1], &ends_d[k1], vl, dl);
          if (has_right) side_eval(j, &ends_v[0], &ends_d[0], vr, dr);
          for (int pt = 0; pt < nface_pts; ++pt) {
            int r = pt;
            double w = 1.0;
            for (int i = d - 1; i >= 0; --i) {
              if (i == m) {
                x[i] = j * h;
                continue;
              }
              const int gi = r % q;
              r /= q;
              x[i] = (tc[i] + rule.nodes[gi]) * h;
              w *= rule.weights[gi] * h;
            }
            const double ue = exact(x);
            exact_grad(x, g);
            const double el = has_left ? ue - vl[pt] : 0.0;
            const double er = has_right ? ue - vr[pt] : 0.0;
            const double gl = has_left ? g[m] - dl[pt] : 0.0;
            const double gr = has_right ? g[m] - dr[pt] : 0.0;
            double jmp, avg;
            if (has_left && has_right) {
              jmp = el - er;
              avg = 0.5 * (gl + gr);
            } else {
              jmp = has_left ? el : er;
              avg = has_left ? gl : gr;
            }
            flux += w * h * avg * avg;
            jump += w / h * jmp * jmp;
          }
        }
      }
    rep.energy = std::sqrt(rep.h1_semi + flux + jump);
    rep.energy_jump = std::sqrt(jump);
  }

  rep.l2 = std::sqrt(rep.l2);
  rep.h1 = std::sqrt(rep.l2 * rep.l2 + rep.h1_semi);
  rep.h1_semi = std::sqrt(rep.h1_semi);
  rep.dim = d;
  rep.max_level = n;
  rep.degree = k;
  rep.dofs = space.size();
  return rep;
}

}  // namespace

ErrorReport error_norms(const DiscreteFunction& uh, const ScalarField& exact, const VectorField& exact_grad,
                        const ErrorOptions& opts) {
  return norms(uh, exact, exact_grad, nullptr, opts);
}

ErrorReport error_norms(const DiscreteFunction& uh, const std::vector<SeparableProduct>& exact,
                        const ErrorOptions& opts) {
  // pointwise forms for the face terms
  auto value = [&exact](std::span<const double> x) {
    double s = 0.0;
    for (const auto& t : exact) {
      double v = t.coef;
      for (std::size_t m = 0; m < t.factors.size(); ++m) v *= t.factors[m](x[m]);
      s += v;
    }
    return s;
  };
  auto grad = [&exact](std::span<const double> x, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& t : exact)
      for (std::size_t i = 0; i < g.size(); ++i) {
        double v = t.coef;
        for (std::size_t m = 0; m < t.factors.size(); ++m) v *= m == i ? t.derivatives[m](x[m]) : t.factors[m](x[m]);
        g[i] += v;
      }
  };
  return norms(uh, value, grad, &exact, opts);
}

ErrorReport error_norms(const DiscreteFunction& uh, const Problem& prob, const ErrorOptions& opts) {
  if (prob.exact_separable) return error_norms(uh, *prob.exact_separable, opts);
  return error_norms(uh, prob.exact, prob.exact_grad, opts);
}

std::vector<std::optional<double>> convergence_orders(std::span<const double> errors) {
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i - 1] > 0.0 && errors[i] > 0.0 && std::isfinite(errors[i - 1]) && std::isfinite(errors[i]))
      out[i] = std::log2(errors[i - 1] / errors[i]);
  return out;
}

}  // namespace sgdg
