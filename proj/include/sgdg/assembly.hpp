#pragma once

// Sparse-grid IPDG system: A[r,c] = B(phi_c, phi_r) and the load vector.
//
// The bilinear form is assembled per pair of space elements from 1D
// element-pair tables.  A coefficient is handled as a sum of products of 1D
// factors: explicit factors for constant and separable K, and the
// hierarchical expansion of the projection K_h onto the degree-2k sparse
// space for a general K.

#include <cstdint>
#include <vector>

#include "sgdg/linalg.hpp"
#include "sgdg/problem.hpp"
#include "sgdg/quadrature.hpp"
#include "sgdg/sparse_space.hpp"

namespace sgdg {

struct SchemeParams {
  double sigma = 0.0;  ///< 0 selects default_sigma(d, k)
  QuadConfig quad;
  int threads = 0;     ///< 0: SGDG_THREADS, else all cores
  /// Entries with |a| <= drop_tol * max|A| are left out; 0 keeps all but exact zeros.
  double drop_tol = 1e-12;
};

/// Thread count after applying the environment override and the core count.
int resolve_threads(int requested);

struct AssembledSystem {
  SparseSym A;
  std::vector<double> b;
  double sigma = 0.0;
  int dim = 0;
  int max_level = 0;
  int degree = 0;
  SpaceKind kind = SpaceKind::VHat;
  double assemble_seconds = 0.0;

  std::int64_t nnz_full() const { return A.full_nnz(); }
  std::int64_t nnz_upper() const { return A.stored_nnz(); }
};

double effective_sigma(const SpaceSpec& space, const SchemeParams& params);

/// Exact zeros and roundoff-level entries (see drop_tol) are left out.
SparseSym assemble_matrix(const SpaceSpec& space, const Problem& prob, const SchemeParams& params);
std::vector<double> assemble_rhs(const SpaceSpec& space, const Problem& prob, const SchemeParams& params);
AssembledSystem assemble(const SpaceSpec& space, const Problem& prob, const SchemeParams& params);

/// Gram matrix of the space's basis (identity for orthonormal families).
SparseSym mass_matrix(const SpaceSpec& space, int threads = 1);

/// L2 projection coefficients.  Orthonormal spaces use inner products
/// directly; the non-orthogonal family solves the Gram system, throwing
/// SolveError(Breakdown) if the factorization fails.
std::vector<double> l2_project_function(const ScalarField& u, const SpaceSpec& space, const QuadConfig& quad = {});

}  // namespace sgdg
