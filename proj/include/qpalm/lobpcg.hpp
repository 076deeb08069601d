#pragma once

#include <span>
#include <vector>

#include "qpalm/sparse_matrix.hpp"

namespace qpalm {

/// Eigenpairs of a small dense generalized symmetric problem A v = mu B v.
struct SmallEigResult {
  Vector values;                // ascending
  std::vector<Vector> vectors;  // vectors[i] pairs with values[i], B-normalized
};

/// Solves A v = mu B v for k <= 3 (A, B row-major k*k, B SPD) through a
/// Cholesky reduction and cyclic Jacobi rotations. Throws std::runtime_error
/// when B is numerically singular.
SmallEigResult small_generalized_symmetric_eig(std::span<const double> a,
                                               std::span<const double> b,
                                               int k);

struct EigEstimate {
  double lambda_lb = 0.0;  // lower bound on the smallest eigenvalue
  Vector eigvec;           // unit 2-norm
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  /// Rayleigh quotient of every iterate, starting with the initial vector.
  Vector rayleigh_history;
};

/// Smallest eigenvalue of the symmetric matrix `q` by locally optimal
/// conjugate gradient iterations on the Rayleigh quotient. On exit
/// lambda_lb = rayleigh(eigvec) - ||Q eigvec - rayleigh * eigvec||_2.
/// When max_iter is hit the best estimate is returned with converged=false.
EigEstimate min_eigenvalue(const SparseMatrix& q, std::span<const double> x0,
                           double eps = 1e-5, int max_iter = 10000);

/// Deterministic start vector: all ones with an alternating +-1 perturbation
/// pattern, normalized.
Vector default_eig_start(Index n);

/// min_i (Q_ii - sum_{j != i} |Q_ij|).
double gershgorin_lower_bound(const SparseMatrix& q);

}  // namespace qpalm
