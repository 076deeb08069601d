#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qpalm {

using Index = int;
using Vector = std::vector<double>;

/// Storage convention of a SparseMatrix. Symmetric matrices keep the upper
/// triangle (row <= col) only.
enum class Symmetry { general, upper };

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Sparse vector with sorted, unique indices.
struct SparseVector {
  std::vector<Index> indices;
  std::vector<double> values;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// Compressed sparse column matrix.
///
/// Within each column the row indices are strictly increasing. Matrices
/// flagged as Symmetry::upper represent the symmetric matrix whose upper
/// triangle is stored; all products and norms act on the full matrix.
class SparseMatrix {
 public:
  SparseMatrix() : colptr_(1, 0) {}
  SparseMatrix(Index nrows, Index ncols, std::vector<Index> colptr,
               std::vector<Index> rowidx, std::vector<double> values,
               Symmetry symmetry = Symmetry::general);

  /// Builds a matrix from (row, col, value) triplets. Duplicates are summed.
  /// For Symmetry::upper, entries below the diagonal are mirrored into the
  /// upper triangle (so a full symmetric triplet list double counts).
  static SparseMatrix from_triplets(Index nrows, Index ncols,
                                    std::span<const Triplet> triplets,
                                    Symmetry symmetry = Symmetry::general);
  static SparseMatrix identity(Index n, double scale = 1.0);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix zero(Index nrows, Index ncols,
                           Symmetry symmetry = Symmetry::general);
  /// Row-major dense input; zeros are dropped. For Symmetry::upper only the
  /// upper triangle of `dense` is read.
  static SparseMatrix from_dense(Index nrows, Index ncols,
                                 std::span<const double> dense,
                                 Symmetry symmetry = Symmetry::general);

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  Symmetry symmetry() const { return symmetry_; }
  bool is_symmetric() const { return symmetry_ == Symmetry::upper; }

  std::span<const Index> colptr() const { return colptr_; }
  std::span<const Index> rowidx() const { return rowidx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const Index> col_rows(Index j) const {
    return {rowidx_.data() + colptr_[j],
            static_cast<std::size_t>(colptr_[j + 1] - colptr_[j])};
  }
  std::span<const double> col_values(Index j) const {
    return {values_.data() + colptr_[j],
            static_cast<std::size_t>(colptr_[j + 1] - colptr_[j])};
  }

  /// Stored coefficient (0 when structurally absent). Symmetric matrices
  /// answer for both triangles.
  double coeff(Index i, Index j) const;

  /// y = M x, or y += M x when `accumulate`.
  void multiply(std::span<const double> x, std::span<double> y,
                bool accumulate = false) const;
  Vector multiply(std::span<const double> x) const;
  /// y = M^T x, or y += M^T x when `accumulate`.
  void multiply_transpose(std::span<const double> x, std::span<double> y,
                          bool accumulate = false) const;
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  /// Full storage of a symmetric matrix (identity on general matrices).
  SparseMatrix expanded() const;
  std::vector<Triplet> triplets() const;
  /// Row-major dense copy of the full matrix.
  std::vector<double> to_dense() const;

  /// max_i sum_j |M_ij| of the full matrix.
  double norm_inf() const;
  /// Infinity norms of rows / columns of the full matrix.
  Vector row_inf_norms() const;
  Vector col_inf_norms() const;
  /// Number of nonzeros of the full matrix (off-diagonal entries of a
  /// symmetric matrix counted twice).
  Index full_nnz() const;

  /// Scales to diag(left) * M * diag(right) in place.
  void scale(std::span<const double> left, std::span<const double> right);

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> colptr_;
  std::vector<Index> rowidx_;
  std::vector<double> values_;
  Symmetry symmetry_ = Symmetry::general;
};

/// Scatters a sparse vector into a dense one of size n.
Vector to_dense(const SparseVector& v, Index n);
/// Keeps the nonzero entries of a dense vector.
SparseVector to_sparse(std::span<const double> v);

double norm_inf(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

}  // namespace qpalm
