#include "qpalm/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qpalm {

SparseMatrix::SparseMatrix(Index nrows, Index ncols, std::vector<Index> colptr,
                           std::vector<Index> rowidx,
                           std::vector<double> values, Symmetry symmetry)
    : nrows_(nrows),
      ncols_(ncols),
      colptr_(std::move(colptr)),
      rowidx_(std::move(rowidx)),
      values_(std::move(values)),
      symmetry_(symmetry) {
  if (nrows < 0 || ncols < 0) {
    throw std::invalid_argument("SparseMatrix: negative dimension");
  }
  if (colptr_.size() != static_cast<std::size_t>(ncols) + 1 ||
      colptr_.front() != 0 ||
      colptr_.back() != static_cast<Index>(values_.size()) ||
      rowidx_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSC arrays");
  }
  if (symmetry_ == Symmetry::upper && nrows != ncols) {
    throw std::invalid_argument("SparseMatrix: symmetric matrix must be square");
  }
  for (Index j = 0; j < ncols; ++j) {
    if (colptr_[j + 1] < colptr_[j]) {
      throw std::invalid_argument("SparseMatrix: colptr must be nondecreasing");
    }
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index i = rowidx_[p];
      if (i < 0 || i >= nrows) {
        throw std::invalid_argument("SparseMatrix: row index out of range");
      }
      if (p > colptr_[j] && rowidx_[p - 1] >= i) {
        throw std::invalid_argument(
            "SparseMatrix: row indices must be strictly increasing in column " +
            std::to_string(j));
      }
      if (symmetry_ == Symmetry::upper && i > j) {
        throw std::invalid_argument(
            "SparseMatrix: symmetric storage holds the upper triangle only");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index nrows, Index ncols,
                                         std::span<const Triplet> triplets,
                                         Symmetry symmetry) {
  std::vector<Triplet> t(triplets.begin(), triplets.end());
  for (auto& e : t) {
    if (e.row < 0 || e.row >= nrows || e.col < 0 || e.col >= ncols) {
      throw std::invalid_argument("from_triplets: index out of range");
    }
    if (symmetry == Symmetry::upper && e.row > e.col) std::swap(e.row, e.col);
  }
  // Two stable counting passes (by row, then by column) give column-major
  // order with ascending rows.
  auto bucket = [&](const std::vector<Triplet>& in, std::vector<Triplet>& out, Index count,
                    auto key) {
    std::vector<Index> start(static_cast<std::size_t>(count) + 1, 0);
    for (const auto& e : in) ++start[key(e) + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    out.resize(in.size());
    for (const auto& e : in) out[start[key(e)]++] = e;
  };
  std::vector<Triplet> by_row;
  bucket(t, by_row, nrows, [](const Triplet& e) { return e.row; });
  bucket(by_row, t, ncols, [](const Triplet& e) { return e.col; });
  std::vector<Index> colptr(static_cast<std::size_t>(ncols) + 1, 0);
  std::vector<Index> rowidx;
  std::vector<double> values;
  rowidx.reserve(t.size());
  values.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
      values.back() += t[k].value;
      continue;
    }
    rowidx.push_back(t[k].row);
    values.push_back(t[k].value);
    ++colptr[t[k].col + 1];
  }
  std::partial_sum(colptr.begin(), colptr.end(), colptr.begin());
  return {nrows, ncols, std::move(colptr), std::move(rowidx), std::move(values),
          symmetry};
}

SparseMatrix SparseMatrix::identity(Index n, double scale) {
  std::vector<Index> colptr(static_cast<std::size_t>(n) + 1);
  std::iota(colptr.begin(), colptr.end(), 0);
  std::vector<Index> rowidx(static_cast<std::size_t>(n));
  std::iota(rowidx.begin(), rowidx.end(), 0);
  return {n, n, std::move(colptr), std::move(rowidx),
          std::vector<double>(static_cast<std::size_t>(n), scale),
          Symmetry::upper};
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  auto m = identity(static_cast<Index>(diag.size()));
  std::copy(diag.begin(), diag.end(), m.values_.begin());
  return m;
}

SparseMatrix SparseMatrix::zero(Index nrows, Index ncols, Symmetry symmetry) {
  return {nrows, ncols, std::vector<Index>(static_cast<std::size_t>(ncols) + 1, 0),
          {}, {}, symmetry};
}

SparseMatrix SparseMatrix::from_dense(Index nrows, Index ncols,
                                      std::span<const double> dense,
                                      Symmetry symmetry) {
  if (dense.size() != static_cast<std::size_t>(nrows) * ncols) {
    throw std::invalid_argument("from_dense: size mismatch");
  }
  std::vector<Triplet> t;
  for (Index i = 0; i < nrows; ++i) {
    for (Index j = symmetry == Symmetry::upper ? i : 0; j < ncols; ++j) {
      const double v = dense[static_cast<std::size_t>(i) * ncols + j];
      if (v != 0.0) t.push_back({i, j, v});
    }
  }
  return from_triplets(nrows, ncols, t, symmetry);
}

double SparseMatrix::coeff(Index i, Index j) const {
  if (symmetry_ == Symmetry::upper && i > j) std::swap(i, j);
  auto rows = col_rows(j);
  auto it = std::lower_bound(rows.begin(), rows.end(), i);
  if (it == rows.end() || *it != i) return 0.0;
  return values_[colptr_[j] + (it - rows.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y,
                            bool accumulate) const {
  if (x.size() != static_cast<std::size_t>(ncols_) ||
      y.size() != static_cast<std::size_t>(nrows_)) {
    throw std::invalid_argument("multiply: dimension mismatch");
  }
  if (!accumulate) std::fill(y.begin(), y.end(), 0.0);
  for (Index j = 0; j < ncols_; ++j) {
    const double xj = x[j];
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index i = rowidx_[p];
      y[i] += values_[p] * xj;
      if (symmetry_ == Symmetry::upper && i != j) y[j] += values_[p] * x[i];
    }
  }
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(nrows_));
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(std::span<const double> x,
                                      std::span<double> y,
                                      bool accumulate) const {
  if (symmetry_ == Symmetry::upper) {
    multiply(x, y, accumulate);
    return;
  }
  if (x.size() != static_cast<std::size_t>(nrows_) ||
      y.size() != static_cast<std::size_t>(ncols_)) {
    throw std::invalid_argument("multiply_transpose: dimension mismatch");
  }
  for (Index j = 0; j < ncols_; ++j) {
    double acc = accumulate ? y[j] : 0.0;
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      acc += values_[p] * x[rowidx_[p]];
    }
    y[j] = acc;
  }
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(ncols_));
  multiply_transpose(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  if (symmetry_ == Symmetry::upper) return *this;
  std::vector<Index> colptr(static_cast<std::size_t>(nrows_) + 1, 0);
  for (Index i : rowidx_) ++colptr[i + 1];
  std::partial_sum(colptr.begin(), colptr.end(), colptr.begin());
  std::vector<Index> next(colptr.begin(), colptr.end() - 1);
  std::vector<Index> rowidx(rowidx_.size());
  std::vector<double> values(values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index q = next[rowidx_[p]]++;
      rowidx[q] = j;
      values[q] = values_[p];
    }
  }
  return {ncols_, nrows_, std::move(colptr), std::move(rowidx),
          std::move(values)};
}

SparseMatrix SparseMatrix::expanded() const {
  if (symmetry_ != Symmetry::upper) return *this;
  std::vector<Triplet> t;
  t.reserve(2 * values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      t.push_back({rowidx_[p], j, values_[p]});
      if (rowidx_[p] != j) t.push_back({j, rowidx_[p], values_[p]});
    }
  }
  return from_triplets(nrows_, ncols_, t);
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      t.push_back({rowidx_[p], j, values_[p]});
    }
  }
  return t;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(nrows_) * ncols_, 0.0);
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index i = rowidx_[p];
      dense[static_cast<std::size_t>(i) * ncols_ + j] = values_[p];
      if (symmetry_ == Symmetry::upper) {
        dense[static_cast<std::size_t>(j) * ncols_ + i] = values_[p];
      }
    }
  }
  return dense;
}

double SparseMatrix::norm_inf() const {
  Vector rowsum(static_cast<std::size_t>(nrows_), 0.0);
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const double a = std::abs(values_[p]);
      rowsum[rowidx_[p]] += a;
      if (symmetry_ == Symmetry::upper && rowidx_[p] != j) rowsum[j] += a;
    }
  }
  return rowsum.empty() ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
}

Vector SparseMatrix::row_inf_norms() const {
  Vector r(static_cast<std::size_t>(nrows_), 0.0);
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const double a = std::abs(values_[p]);
      r[rowidx_[p]] = std::max(r[rowidx_[p]], a);
      if (symmetry_ == Symmetry::upper) r[j] = std::max(r[j], a);
    }
  }
  return r;
}

Vector SparseMatrix::col_inf_norms() const {
  if (symmetry_ == Symmetry::upper) return row_inf_norms();
  Vector c(static_cast<std::size_t>(ncols_), 0.0);
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      c[j] = std::max(c[j], std::abs(values_[p]));
    }
  }
  return c;
}

Index SparseMatrix::full_nnz() const {
  if (symmetry_ != Symmetry::upper) return nnz();
  Index count = 0;
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      count += rowidx_[p] == j ? 1 : 2;
    }
  }
  return count;
}

void SparseMatrix::scale(std::span<const double> left,
                         std::span<const double> right) {
  if (left.size() != static_cast<std::size_t>(nrows_) ||
      right.size() != static_cast<std::size_t>(ncols_)) {
    throw std::invalid_argument("scale: dimension mismatch");
  }
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      values_[p] *= left[rowidx_[p]] * right[j];
    }
  }
}

Vector to_dense(const SparseVector& v, Index n) {
  Vector d(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < v.indices.size(); ++k) {
    d[v.indices[k]] += v.values[k];
  }
  return d;
}

SparseVector to_sparse(std::span<const double> v) {
  SparseVector s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      s.indices.push_back(static_cast<Index>(i));
      s.values.push_back(v[i]);
    }
  }
  return s;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace qpalm
