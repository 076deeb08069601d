#include "qpalm/ldl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

namespace qpalm {

namespace {

constexpr double kRelativePivotTolerance = 1e-15;

}  // namespace

LdlFactors LdlFactors::factorize(const SparseMatrix& upper, Permutation perm) {
  if (upper.rows() != upper.cols() || !upper.is_symmetric()) {
    throw std::invalid_argument("ldl_factorize: expected upper-stored symmetric matrix");
  }
  const Index n = upper.rows();
  if (!is_permutation(perm, n)) {
    throw std::invalid_argument("ldl_factorize: invalid permutation");
  }
  LdlFactors f;
  f.n_ = n;
  f.pinv_ = invert_permutation(perm);
  f.perm_ = std::move(perm);
  f.cols_.assign(static_cast<std::size_t>(n), {});
  f.d_.assign(static_cast<std::size_t>(n), 0.0);
  f.norm_ref_ = std::max(upper.norm_inf(), 1e-300);

  const auto c = symmetric_permute(upper, f.pinv_);
  const auto parent = elimination_tree(c);

  Vector y(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> flag(static_cast<std::size_t>(n), -1);
  std::vector<Index> pattern(static_cast<std::size_t>(n));
  std::vector<Index> stack(static_cast<std::size_t>(n));

  // Symbolic pass for the column counts.
  std::vector<Index> counts(static_cast<std::size_t>(n), 0);
  for (Index k = 0; k < n; ++k) {
    flag[k] = k;
    for (Index i : c.col_rows(k)) {
      for (; flag[i] != k; i = parent[i]) {
        flag[i] = k;
        ++counts[i];
      }
    }
  }
  for (Index j = 0; j < n; ++j) {
    f.cols_[j].rows.reserve(static_cast<std::size_t>(counts[j]));
    f.cols_[j].vals.reserve(static_cast<std::size_t>(counts[j]));
  }
  std::fill(flag.begin(), flag.end(), -1);

  for (Index k = 0; k < n; ++k) {
    Index top = n;
    flag[k] = k;
    auto rows = c.col_rows(k);
    auto vals = c.col_values(k);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      Index i = rows[p];
      y[i] += vals[p];
      Index len = 0;
      for (; flag[i] != k; i = parent[i]) {
        stack[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = stack[--len];
    }
    double dk = y[k];
    y[k] = 0.0;
    for (; top < n; ++top) {
      const Index i = pattern[top];
      const double yi = y[i];
      y[i] = 0.0;
      auto& col = f.cols_[i];
      for (std::size_t p = 0; p < col.rows.size(); ++p) {
        y[col.rows[p]] -= col.vals[p] * yi;
      }
      const double lki = yi / f.d_[i];
      dk -= lki * yi;
      col.rows.push_back(k);
      col.vals.push_back(lki);
    }
    f.check_pivot(dk, k);
    f.d_[k] = dk;
  }
  return f;
}

void LdlFactors::ensure_workspace() {
  const auto n = static_cast<std::size_t>(n_);
  if (work_.size() == n) return;
  work_.assign(n, 0.0);
  work2_.assign(n, 0.0);
  mark_.assign(n, 0);
  mark2_.assign(n, 0);
}

void LdlFactors::clear_workspace() {
  std::fill(work_.begin(), work_.end(), 0.0);
  std::fill(work2_.begin(), work2_.end(), 0.0);
  std::fill(mark_.begin(), mark_.end(), 0);
  std::fill(mark2_.begin(), mark2_.end(), 0);
}

double LdlFactors::pivot_tolerance() const {
  return kRelativePivotTolerance * norm_ref_;
}

void LdlFactors::check_pivot(double d, Index k) const {
  if (!(std::abs(d) >= pivot_tolerance())) {
    throw FactorizationError("zero pivot at factor position " +
                             std::to_string(k));
  }
}

SparseMatrix LdlFactors::lower() const {
  std::vector<Index> colptr(static_cast<std::size_t>(n_) + 1, 0);
  std::vector<Index> rowidx;
  std::vector<double> values;
  rowidx.reserve(lower_nnz());
  values.reserve(lower_nnz());
  for (Index j = 0; j < n_; ++j) {
    const auto& col = cols_[j];
    rowidx.insert(rowidx.end(), col.rows.begin(), col.rows.end());
    values.insert(values.end(), col.vals.begin(), col.vals.end());
    colptr[j + 1] = static_cast<Index>(rowidx.size());
  }
  return {n_, n_, std::move(colptr), std::move(rowidx), std::move(values)};
}

std::size_t LdlFactors::lower_nnz() const {
  std::size_t count = 0;
  for (const auto& col : cols_) count += col.rows.size();
  return count;
}

Vector LdlFactors::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

void LdlFactors::solve_in_place(std::span<double> b) const {
  if (b.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("ldl_solve: dimension mismatch");
  }
  Vector x(static_cast<std::size_t>(n_));
  for (Index k = 0; k < n_; ++k) x[k] = b[perm_[k]];
  for (Index j = 0; j < n_; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto& col = cols_[j];
    for (std::size_t p = 0; p < col.rows.size(); ++p) {
      x[col.rows[p]] -= col.vals[p] * xj;
    }
  }
  for (Index j = 0; j < n_; ++j) x[j] /= d_[j];
  for (Index j = n_ - 1; j >= 0; --j) {
    const auto& col = cols_[j];
    double acc = x[j];
    for (std::size_t p = 0; p < col.rows.size(); ++p) {
      acc -= col.vals[p] * x[col.rows[p]];
    }
    x[j] = acc;
  }
  for (Index k = 0; k < n_; ++k) b[perm_[k]] = x[k];
}

SparseVector LdlFactors::to_factor_order(const SparseVector& v) const {
  std::vector<std::pair<Index, double>> entries;
  entries.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    entries.emplace_back(pinv_[v.indices[k]], v.values[k]);
  }
  std::sort(entries.begin(), entries.end());
  SparseVector out;
  for (const auto& [i, val] : entries) {
    if (!out.indices.empty() && out.indices.back() == i) {
      out.values.back() += val;
    } else {
      out.indices.push_back(i);
      out.values.push_back(val);
    }
  }
  return out;
}

// Gill-Golub-Murray-Saunders method C1 on the sparse factor: only columns on
// the (evolving) elimination-tree path of w are touched, and column j
// acquires the pattern of the pending part of w.
void LdlFactors::rank1_update(const SparseVector& w, int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("rank1_update: sign must be +1 or -1");
  }
  for (Index i : w.indices) {
    if (i < 0 || i >= n_) throw std::invalid_argument("rank1_update: index out of range");
  }
  ensure_workspace();
  try {
    rank1_update_impl(w, sign);
  } catch (...) {
    clear_workspace();
    throw;
  }
}

void LdlFactors::rank1_update_impl(const SparseVector& w, int sign) {
  Vector& work = work_;
  std::vector<Index> pending;
  pending.reserve(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Index i = w.indices[k];
    if (work[i] == 0.0 && w.values[k] != 0.0) pending.push_back(i);
    work[i] += w.values[k];
  }
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());

  double alpha = sign;
  std::vector<Index> merged;
  std::vector<double> merged_vals;
  std::size_t head = 0;
  while (head < pending.size()) {
    const Index j = pending[head++];
    const double p = work[j];
    work[j] = 0.0;
    if (p == 0.0) continue;

    const double dj = d_[j];
    const double dnew = dj + alpha * p * p;
    check_pivot(dnew, j);
    const double beta = p * alpha / dnew;
    alpha *= dj / dnew;
    d_[j] = dnew;

    auto& col = cols_[j];
    merged.clear();
    merged_vals.clear();
    merged.reserve(col.rows.size() + pending.size() - head);
    merged_vals.reserve(col.rows.size() + pending.size() - head);
    std::size_t a = head;
    std::size_t b = 0;
    while (a < pending.size() || b < col.rows.size()) {
      Index i;
      double lij = 0.0;
      if (b == col.rows.size() ||
          (a < pending.size() && pending[a] < col.rows[b])) {
        i = pending[a++];
      } else if (a == pending.size() || col.rows[b] < pending[a]) {
        i = col.rows[b];
        lij = col.vals[b++];
      } else {
        i = pending[a++];
        lij = col.vals[b++];
      }
      work[i] -= p * lij;
      merged.push_back(i);
      merged_vals.push_back(lij + beta * work[i]);
    }
    col.rows.assign(merged.begin(), merged.end());
    col.vals.swap(merged_vals);
    pending.swap(merged);
    head = 0;
  }
}

void LdlFactors::row_add(Index beta, const SparseVector& column,
                         double diag_value) {
  if (beta < 0 || beta >= n_) throw std::invalid_argument("row_add: index out of range");
  if (!cols_[beta].rows.empty()) {
    throw std::invalid_argument("row_add: column is not a placeholder");
  }
  for (Index i : column.indices) {
    if (i < 0 || i >= n_) throw std::invalid_argument("row_add: index out of range");
  }
  ensure_workspace();
  try {
    row_add_impl(beta, column, diag_value);
  } catch (...) {
    clear_workspace();
    throw;
  }
}

void LdlFactors::row_add_impl(Index k, const SparseVector& column, double diag_value) {
  Vector& y = work_;
  Vector& acc = work2_;
  std::vector<char>& mark = mark_;
  std::vector<char>& gmark = mark2_;
  std::vector<Index> gamma_pattern;
  std::priority_queue<Index, std::vector<Index>, std::greater<>> heap;

  for (std::size_t p = 0; p < column.size(); ++p) {
    const Index i = column.indices[p];
    if (i < k) {
      y[i] += column.values[p];
      if (!mark[i]) {
        mark[i] = 1;
        heap.push(i);
      }
    } else if (i > k) {
      acc[i] += column.values[p];
      if (!gmark[i]) {
        gmark[i] = 1;
        gamma_pattern.push_back(i);
      }
    }
  }

  // L_aa D_aa lbar_a = cbar_a; y holds D_aa lbar_a after the solve
  std::vector<Index> reach;
  while (!heap.empty()) {
    const Index j = heap.top();
    heap.pop();
    reach.push_back(j);
    const double yj = y[j];
    const auto& col = cols_[j];
    for (std::size_t p = 0; p < col.rows.size() && col.rows[p] < k; ++p) {
      const Index r = col.rows[p];
      y[r] -= col.vals[p] * yj;
      if (!mark[r]) {
        mark[r] = 1;
        heap.push(r);
      }
    }
  }

  double dbar = diag_value;
  for (Index j : reach) dbar -= y[j] * y[j] / d_[j];
  check_pivot(dbar, k);

  for (Index j : reach) {
    const double yj = y[j];
    const auto& col = cols_[j];
    auto it = std::upper_bound(col.rows.begin(), col.rows.end(), k);
    for (auto p = static_cast<std::size_t>(it - col.rows.begin());
         p < col.rows.size(); ++p) {
      const Index r = col.rows[p];
      acc[r] -= col.vals[p] * yj;
      if (!gmark[r]) {
        gmark[r] = 1;
        gamma_pattern.push_back(r);
      }
    }
  }

  for (Index j : reach) {
    auto& col = cols_[j];
    auto it = std::lower_bound(col.rows.begin(), col.rows.end(), k);
    const auto pos = it - col.rows.begin();
    col.rows.insert(it, k);
    col.vals.insert(col.vals.begin() + pos, y[j] / d_[j]);
  }

  std::sort(gamma_pattern.begin(), gamma_pattern.end());
  auto& colk = cols_[k];
  SparseVector w;
  const double root = std::sqrt(std::abs(dbar));
  for (Index r : gamma_pattern) {
    const double l = acc[r] / dbar;
    acc[r] = 0.0;
    gmark[r] = 0;
    colk.rows.push_back(r);
    colk.vals.push_back(l);
    if (l != 0.0) {
      w.indices.push_back(r);
      w.values.push_back(l * root);
    }
  }
  for (Index j : reach) {
    y[j] = 0.0;
    mark[j] = 0;
  }
  d_[k] = dbar;
  rank1_update(w, dbar > 0.0 ? -1 : 1);
}

void LdlFactors::row_delete(Index beta, double diag_value) {
  if (beta < 0 || beta >= n_) throw std::invalid_argument("row_delete: index out of range");
  check_pivot(diag_value, beta);
  const Index k = beta;
  for (Index j = 0; j < k; ++j) {
    auto& col = cols_[j];
    auto it = std::lower_bound(col.rows.begin(), col.rows.end(), k);
    if (it != col.rows.end() && *it == k) {
      const auto pos = it - col.rows.begin();
      col.rows.erase(it);
      col.vals.erase(col.vals.begin() + pos);
    }
  }
  auto& colk = cols_[k];
  const double dk = d_[k];
  const double root = std::sqrt(std::abs(dk));
  SparseVector w;
  for (std::size_t p = 0; p < colk.rows.size(); ++p) {
    if (colk.vals[p] == 0.0) continue;
    w.indices.push_back(colk.rows[p]);
    w.values.push_back(colk.vals[p] * root);
  }
  colk.rows.clear();
  colk.vals.clear();
  d_[k] = diag_value;
  rank1_update(w, dk > 0.0 ? 1 : -1);
}

void LdlFactors::set_decoupled_pivot(Index beta, double diag_value) {
  if (beta < 0 || beta >= n_) {
    throw std::invalid_argument("set_decoupled_pivot: index out of range");
  }
  if (!cols_[beta].rows.empty()) {
    throw std::invalid_argument("set_decoupled_pivot: row is coupled");
  }
  check_pivot(diag_value, beta);
  d_[beta] = diag_value;
}

}  // namespace qpalm
