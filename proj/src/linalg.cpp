#include "sgdg/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "sgdg/error.hpp"

namespace sgdg {

std::int64_t SparseSym::full_nnz() const {
  std::int64_t diag = 0;
  for (int r = 0; r < rows_added_; ++r)
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      if (cols_[p] == r) ++diag;
  return 2 * stored_nnz() - diag;
}

void SparseSym::append_row(int row, std::span<const int> cols, std::span<const double> vals) {
  if (row != rows_added_ || row >= dim_) throw ConfigError("SparseSym: rows must be appended in order");
  cols_.insert(cols_.end(), cols.begin(), cols.end());
  vals_.insert(vals_.end(), vals.begin(), vals.end());
  ++rows_added_;
  row_ptr_[rows_added_] = static_cast<std::int64_t>(cols_.size());
}

void SparseSym::append_rows(const std::vector<std::int64_t>& local_ptr, std::vector<int>&& cols,
                            std::vector<double>&& vals, int first_row) {
  if (first_row != rows_added_) throw ConfigError("SparseSym: row blocks must be appended in order");
  const int n = static_cast<int>(local_ptr.size()) - 1;
  if (first_row + n > dim_) throw ConfigError("SparseSym: too many rows");
  const std::int64_t base = static_cast<std::int64_t>(cols_.size());
  if (cols_.empty()) {
    cols_ = std::move(cols);
    vals_ = std::move(vals);
  } else {
    cols_.insert(cols_.end(), cols.begin(), cols.end());
    vals_.insert(vals_.end(), vals.begin(), vals.end());
  }
  for (int i = 1; i <= n; ++i) row_ptr_[first_row + i] = base + local_ptr[i];
  rows_added_ += n;
}

void SparseSym::validate() const {
  if (rows_added_ != dim_) throw ConfigError("SparseSym: incomplete matrix");
  for (int r = 0; r < dim_; ++r)
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      if (cols_[p] < r || cols_[p] >= dim_) throw ConfigError("SparseSym: column out of range");
      if (p > row_ptr_[r] && cols_[p] <= cols_[p - 1]) throw ConfigError("SparseSym: unsorted or duplicate column");
      if (!std::isfinite(vals_[p])) throw ConfigError("SparseSym: non-finite value");
    }
}

double SparseSym::at(int row, int col) const {
  if (row > col) std::swap(row, col);
  const auto b = cols_.begin() + row_ptr_[row];
  const auto e = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(b, e, col);
  return (it != e && *it == col) ? vals_[it - cols_.begin()] : 0.0;
}

std::vector<double> SparseSym::diagonal() const {
  std::vector<double> d(dim_, 0.0);
  for (int r = 0; r < dim_; ++r) d[r] = at(r, r);
  return d;
}

double SparseSym::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

SparseSym SparseSym::dropped(double threshold) const {
  SparseSym out(dim_);
  out.cols_.reserve(cols_.size());
  out.vals_.reserve(vals_.size());
  for (int r = 0; r < dim_; ++r) {
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      if (std::abs(vals_[p]) > threshold || cols_[p] == r) {
        out.cols_.push_back(cols_[p]);
        out.vals_.push_back(vals_[p]);
      }
    out.row_ptr_[r + 1] = static_cast<std::int64_t>(out.cols_.size());
  }
  out.rows_added_ = dim_;
  return out;
}

void SparseSym::multiply(std::span<const double> x, std::span<double> y, int threads) const {
  auto kernel = [&](int r0, int r1, std::span<double> out) {
    for (int r = r0; r < r1; ++r) {
      double s = 0.0;
      const double xr = x[r];
      for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const int c = cols_[p];
        s += vals_[p] * x[c];
        if (c != r) out[c] += vals_[p] * xr;
      }
      out[r] += s;
    }
  };
  std::fill(y.begin(), y.end(), 0.0);
  if (dim_ < 20000) {
    kernel(0, dim_, y);
    return;
  }
  // fixed partition so the summation order does not depend on the thread count
  constexpr int kParts = 16;
  std::vector<std::vector<double>> parts(kParts, std::vector<double>(dim_, 0.0));
  std::vector<int> bounds(kParts + 1, 0);
  const std::int64_t total = stored_nnz();
  for (int t = 1; t < kParts; ++t) {
    const std::int64_t target = total * t / kParts;
    const int r = static_cast<int>(std::lower_bound(row_ptr_.begin(), row_ptr_.end(), target) - row_ptr_.begin());
    bounds[t] = std::clamp(r, bounds[t - 1], dim_);
  }
  bounds[kParts] = dim_;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t; (t = next.fetch_add(1)) < kParts;) kernel(bounds[t], bounds[t + 1], parts[t]);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(threads, kParts); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& p : parts)
    for (int i = 0; i < dim_; ++i) y[i] += p[i];
}

Eigen::MatrixXd SparseSym::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int r = 0; r < rows_added_; ++r)
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      a(r, cols_[p]) = vals_[p];
      a(cols_[p], r) = vals_[p];
    }
  return a;
}

SparseSym SparseSym::from_dense(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  SparseSym s(n);
  std::vector<int> cols;
  std::vector<double> vals;
  for (int r = 0; r < n; ++r) {
    cols.clear();
    vals.clear();
    for (int c = r; c < n; ++c)
      if (a(r, c) != 0.0) {
        cols.push_back(c);
        vals.push_back(a(r, c));
      }
    s.append_row(r, cols, vals);
  }
  return s;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Smallest eigenvalue of the Lanczos tridiagonal built from CG coefficients.
double min_ritz_value(const std::vector<double>& alphas, const std::vector<double>& betas) {
  const int n = static_cast<int>(alphas.size());
  if (n == 0) return 0.0;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int j = 0; j < n; ++j) {
    diag[j] = 1.0 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0);
    if (j + 1 < n) sub[j] = std::sqrt(betas[j]) / alphas[j];
  }
  if (n == 1) return diag[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

SolveReport solve(const SparseSym& a, std::span<const double> b, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = a.dim();
  if (static_cast<int>(b.size()) != n) throw ConfigError("solve: right-hand side has wrong length");
  if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw ConfigError("solve: tolerance must be in (0, 1)");
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n + 100;

  SolveReport rep;
  rep.x.assign(n, 0.0);
  const double bnorm = norm(b);
  auto finish = [&] {
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  if (bnorm == 0.0) {
    rep.converged = true;
    finish();
    return rep;
  }

  std::vector<double> inv_diag(n, 1.0);
  if (opts.jacobi) {
    const auto d = a.diagonal();
    for (int i = 0; i < n; ++i) {
      if (!(d[i] > 0.0)) {
        std::ostringstream os;
        os << "matrix is not positive definite: diagonal entry " << i << " is " << d[i];
        throw SolveError(SolveError::Reason::Indefinite, os.str(), d[i]);
      }
      inv_diag[i] = 1.0 / d[i];
    }
  }

  std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  std::vector<double> alphas, betas;
  for (int it = 0; it < max_iter; ++it) {
    a.multiply(p, ap, opts.threads);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      double pmp = 0.0;
      for (int i = 0; i < n; ++i) pmp += p[i] * p[i] / inv_diag[i];
      const double ritz = std::min(pap / pmp, min_ritz_value(alphas, betas));
      std::ostringstream os;
      os << "matrix is not positive definite: non-positive curvature at CG iteration " << it
         << ", smallest Ritz value " << ritz;
      throw SolveError(SolveError::Reason::Indefinite, os.str(), ritz);
    }
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      rep.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    alphas.push_back(alpha);
    rep.iterations = it + 1;
    rep.residual = norm(r) / bnorm;
    if (rep.residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.min_ritz = min_ritz_value(alphas, betas);
  finish();
  if (rep.min_ritz <= 0.0) {
    std::ostringstream os;
    os << "matrix is not positive definite: smallest Ritz value " << rep.min_ritz;
    throw SolveError(SolveError::Reason::Indefinite, os.str(), rep.min_ritz);
  }
  if (!rep.converged && opts.throw_on_failure) {
    std::ostringstream os;
    os << "CG did not converge in " << rep.iterations << " iterations (relative residual " << rep.residual << ")";
    throw SolveError(SolveError::Reason::NotConverged, os.str(), rep.min_ritz);
  }
  return rep;
}

std::vector<double> dense_solve(const SparseSym& a, std::span<const double> b) {
  const Eigen::MatrixXd m = a.to_dense();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw SolveError(SolveError::Reason::Indefinite, "dense Cholesky failed: matrix is not positive definite", 0.0);
  const Eigen::VectorXd x = llt.solve(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  return {x.data(), x.data() + x.size()};
}

namespace {

// Largest eigenvalue of a symmetric operator by Lanczos with full
// reorthogonalization; stops when the Ritz residual is below tol * theta.
template <class Apply>
std::pair<double, int> lanczos_max(int n, Apply&& apply, double tol, unsigned seed) {
  const int max_steps = std::min(n, 400);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> q;
  std::vector<double> v(n), w(n);
  for (auto& x : v) x = u(rng);
  const double v0 = norm(v);
  for (auto& x : v) x /= v0;
  std::vector<double> alpha, beta;
  double theta = 0.0;
  for (int j = 0; j < max_steps; ++j) {
    q.push_back(v);
    apply(v, w);
    const double a = dot(w, v);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) {
        const double c = dot(w, qi);
        for (int i = 0; i < n; ++i) w[i] -= c * qi[i];
      }
    const double b = norm(w);
    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd(0);
    double resid;
    if (m == 1) {
      theta = diag[0];
      resid = b;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      theta = es.eigenvalues()[m - 1];
      resid = b * std::abs(es.eigenvectors()(m - 1, m - 1));
    }
    if (resid <= tol * std::abs(theta) || b <= 1e-14 * std::abs(theta) || j + 1 == n) return {theta, j + 1};
    beta.push_back(b);
    for (int i = 0; i < n; ++i) v[i] = w[i] / b;
  }
  throw SolveError(SolveError::Reason::Breakdown, "Lanczos did not reach the requested tolerance", theta);
}

}  // namespace

CondEstimate cond_estimate(const SparseSym& a, double tol, int threads) {
  const int n = a.dim();
  if (n == 0) throw ConfigError("cond_estimate: empty matrix");
  CondEstimate est;
  const auto [lmax, smax] = lanczos_max(
      n, [&](std::span<const double> x, std::span<double> y) { a.multiply(x, y, threads); }, tol, 12345u);
  SolveOptions opts;
  opts.tol = 1e-14;
  opts.threads = threads;
  opts.max_iter = 50 * n + 1000;
  const auto [inv, smin] = lanczos_max(
      n,
      [&](std::span<const double> x, std::span<double> y) {
        const auto rep = solve(a, x, opts);
        std::copy(rep.x.begin(), rep.x.end(), y.begin());
      },
      tol, 54321u);
  est.lambda_max = lmax;
  est.lambda_min = 1.0 / inv;
  est.cond = est.lambda_max / est.lambda_min;
  est.steps_max = smax;
  est.steps_min = smin;
  return est;
}

void write_matrix_market(const SparseSym& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << a.dim() << " " << a.dim() << " " << a.stored_nnz() << "\n";
  // MatrixMarket symmetric files list the lower triangle: write (col, row).
  std::vector<std::vector<std::pair<int, double>>> lower(a.dim());
  for (int r = 0; r < a.dim(); ++r)
    for (auto p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) lower[a.cols()[p]].push_back({r, a.values()[p]});
  os << std::setprecision(15) << std::scientific;
  for (int c = 0; c < a.dim(); ++c)
    for (const auto& [r, v] : lower[c]) os << c + 1 << " " << r + 1 << " " << v << "\n";
}

void write_matrix_market(const SparseSym& a, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  write_matrix_market(a, f);
}

void write_vector(std::span<const double> v, std::ostream& os) {
  os << std::setprecision(15) << std::scientific;
  for (double x : v) os << x << "\n";
}

void write_vector(std::span<const double> v, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  write_vector(v, f);
}

}  // namespace sgdg
