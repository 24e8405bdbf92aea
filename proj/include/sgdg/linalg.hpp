#pragma once

// Symmetric sparse matrices stored as their upper triangle (CSR, diagonal
// included), conjugate gradients and extremal eigenvalue estimates.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sgdg {

class SparseSym {
public:
  SparseSym() = default;
  explicit SparseSym(int dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

  int dim() const { return dim_; }
  /// Stored (upper-triangle) entries.
  std::int64_t stored_nnz() const { return static_cast<std::int64_t>(cols_.size()); }
  /// Entries of the full symmetric matrix.
  std::int64_t full_nnz() const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  /// Appends row `row` (rows must be added in order); columns ascending, >= row.
  void append_row(int row, std::span<const int> cols, std::span<const double> vals);
  /// Concatenates rows built elsewhere; `other` holds rows first_row .. first_row + n - 1.
  void append_rows(const std::vector<std::int64_t>& local_ptr, std::vector<int>&& cols, std::vector<double>&& vals,
                   int first_row);
  /// Throws ConfigError on unsorted, duplicate, out-of-range or non-finite entries.
  void validate() const;

  double at(int row, int col) const;
  std::vector<double> diagonal() const;
  double max_abs() const;
  /// Copy without off-diagonal entries of magnitude <= threshold.
  SparseSym dropped(double threshold) const;

  /// y = A x.  threads <= 1 runs serially.
  void multiply(std::span<const double> x, std::span<double> y, int threads = 1) const;

  Eigen::MatrixXd to_dense() const;
  /// Upper triangle of a dense symmetric matrix, dropping exact zeros.
  static SparseSym from_dense(const Eigen::MatrixXd& a);

private:
  int dim_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
  int rows_added_ = 0;
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 0;  ///< 0 means 10 * dim + 100
  bool jacobi = true;
  int threads = 1;
  /// When false, non-convergence returns the last iterate instead of throwing.
  bool throw_on_failure = true;
};

struct SolveReport {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;  ///< ||b - A x|| / ||b||
  double seconds = 0.0;
  bool converged = false;
  /// Smallest Ritz value of the preconditioned operator seen by CG.
  double min_ritz = 0.0;
};

/// Preconditioned CG.  Throws SolveError(Indefinite) on non-positive
/// curvature and SolveError(NotConverged) when the iteration limit is hit.
SolveReport solve(const SparseSym& a, std::span<const double> b, const SolveOptions& opts = {});

/// Dense Cholesky solve; for small systems and as a test oracle.
std::vector<double> dense_solve(const SparseSym& a, std::span<const double> b);

struct CondEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double cond = 0.0;
  int steps_max = 0;
  int steps_min = 0;
};

/// 2-norm condition number: Lanczos on A for lambda_max and on A^{-1}
/// (applied by CG) for lambda_min, each to relative tolerance `tol`.
CondEstimate cond_estimate(const SparseSym& a, double tol = 1e-6, int threads = 1);

/// MatrixMarket coordinate real symmetric, 1-based, lower triangle as the
/// format requires (the transpose of the stored upper triangle).
void write_matrix_market(const SparseSym& a, std::ostream& os);
void write_matrix_market(const SparseSym& a, const std::string& path);
/// One value per line, 16 significant digits.
void write_vector(std::span<const double> v, std::ostream& os);
void write_vector(std::span<const double> v, const std::string& path);

}  // namespace sgdg
