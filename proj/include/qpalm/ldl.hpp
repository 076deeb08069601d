#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpalm/ordering.hpp"
#include "qpalm/sparse_matrix.hpp"

namespace qpalm {

/// Raised when a pivot of an LDL^T factorization or update vanishes.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LDL^T factors of P K P^T for symmetric positive definite or quasidefinite
/// K: L unit lower triangular (unit diagonal implicit), D diagonal with
/// nonzero, possibly mixed-sign entries.
///
/// The factors can be modified in place by rank-1 updates/downdates and by
/// row/column addition and deletion. All modification routines take indices
/// and vectors in factor (permuted) coordinates; use `to_factor_order` to
/// map an original-coordinate vector. After a FactorizationError the factors
/// are no longer valid and must be recomputed.
///
/// Not thread-safe for concurrent modification; distinct objects are
/// independent.
class LdlFactors {
 public:
  LdlFactors() = default;

  /// Up-looking LDL^T of P K P^T with P given by `perm`. K must be an
  /// upper-stored symmetric matrix. Throws FactorizationError when a pivot
  /// falls below 1e-15 * ||K||_inf.
  static LdlFactors factorize(const SparseMatrix& upper, Permutation perm);

  Index size() const { return n_; }
  const Permutation& perm() const { return perm_; }
  const Permutation& pinv() const { return pinv_; }
  std::span<const double> diagonal() const { return d_; }
  /// Strictly lower part of L as a CSC matrix.
  SparseMatrix lower() const;
  std::size_t lower_nnz() const;
  /// ||K||_inf of the factored matrix at factorization time; pivots are
  /// compared against pivot_tolerance() = 1e-15 times this.
  double reference_norm() const { return norm_ref_; }
  double pivot_tolerance() const;

  /// Solves K x = b (original coordinates).
  Vector solve(std::span<const double> b) const;
  void solve_in_place(std::span<double> b) const;

  /// Factors of P K P^T + sign * w w^T.
  void rank1_update(const SparseVector& w, int sign);

  /// Replaces row/column `beta` (currently zero apart from its diagonal) by
  /// `column` with diagonal `diag_value`. Entries of `column` at `beta` are
  /// ignored.
  void row_add(Index beta, const SparseVector& column, double diag_value);

  /// Zeroes row/column `beta` and sets its diagonal to `diag_value`.
  void row_delete(Index beta, double diag_value);

  /// Sets the pivot of a row/column that is zero off the diagonal in the
  /// factored matrix (its factor column and row are then empty as well).
  void set_decoupled_pivot(Index beta, double diag_value);

  /// Maps an original-coordinate sparse vector to factor coordinates.
  SparseVector to_factor_order(const SparseVector& v) const;

 private:
  struct Column {
    std::vector<Index> rows;
    std::vector<double> vals;
  };

  void check_pivot(double d, Index k) const;
  void rank1_update_impl(const SparseVector& w, int sign);
  void row_add_impl(Index k, const SparseVector& column, double diag_value);
  void ensure_workspace();
  void clear_workspace();

  Index n_ = 0;
  Permutation perm_;
  Permutation pinv_;
  std::vector<Column> cols_;
  Vector d_;
  double norm_ref_ = 1.0;
  // Scratch arrays of length n, all zero between calls.
  Vector work_;
  Vector work2_;
  std::vector<char> mark_;
  std::vector<char> mark2_;
};

}  // namespace qpalm
