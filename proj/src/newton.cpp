#include "qpalm/newton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpalm {

ActiveSet detect_active_set(std::span<const double> shifted,
                            std::span<const double> l,
                            std::span<const double> u,
                            const ActiveSet* previous) {
  const std::size_t m = shifted.size();
  if (l.size() != m || u.size() != m) {
    throw std::invalid_argument("detect_active_set: dimension mismatch");
  }
  if (previous && previous->flags.size() != m) {
    throw std::invalid_argument("detect_active_set: previous set has wrong size");
  }
  ActiveSet s;
  s.flags.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const bool in = shifted[i] < l[i] || shifted[i] > u[i];
    if (in) {
      s.flags[i] = 1;
      s.members.push_back(static_cast<Index>(i));
    }
    const bool was = previous ? previous->flags[i] != 0 : false;
    if (in && !was) s.entered.push_back(static_cast<Index>(i));
    if (!in && was) s.left.push_back(static_cast<Index>(i));
  }
  return s;
}

ActiveSet detect_active_set(const QpProblem& p, std::span<const double> x,
                            std::span<const double> y,
                            std::span<const double> sigma_y,
                            const ActiveSet* previous) {
  Vector w = p.A.multiply(x);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += y[i] / sigma_y[i];
  return detect_active_set(w, p.l, p.u, previous);
}

SubproblemGradient subproblem_gradient(const QpProblem& p,
                                       std::span<const double> x,
                                       std::span<const double> xhat,
                                       std::span<const double> y,
                                       std::span<const double> sigma_y,
                                       std::span<const double> sigma_x_inv) {
  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  if (x.size() != n || xhat.size() != n || sigma_x_inv.size() != n ||
      y.size() != m || sigma_y.size() != m) {
    throw std::invalid_argument("subproblem_gradient: dimension mismatch");
  }
  SubproblemGradient g;
  g.ax = p.A.multiply(x);
  g.z.resize(m);
  g.ytrial.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = g.ax[i] + y[i] / sigma_y[i];
    g.z[i] = std::min(std::max(w, p.l[i]), p.u[i]);
    g.ytrial[i] = y[i] + sigma_y[i] * (g.ax[i] - g.z[i]);
  }
  g.qx = p.Q.multiply(x);
  g.grad.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    g.grad[j] = g.qx[j] + p.q[j] + sigma_x_inv[j] * (x[j] - xhat[j]);
  }
  p.A.multiply_transpose(g.ytrial, g.grad, true);
  return g;
}

LinsysChoice select_linsys(const SparseMatrix& Q, const SparseMatrix& A,
                           LinsysMode mode) {
  const double n = Q.rows();
  const double m = A.rows();
  LinsysChoice choice;

  double q_offdiag = 0;
  for (Index j = 0; j < Q.cols(); ++j) {
    for (Index i : Q.col_rows(j)) {
      if (i != j) ++q_offdiag;
    }
  }
  const double q_reg = 2.0 * q_offdiag + n;  // |Q + Sigma_x^{-1}|
  choice.kkt_nnz = q_reg + 2.0 * A.nnz() + m;

  std::vector<double> row_count(static_cast<std::size_t>(A.rows()), 0.0);
  for (Index i : A.rowidx()) row_count[i] += 1.0;
  double hat = 0.0;
  std::size_t hat_i = 0;
  for (std::size_t i = 0; i < row_count.size(); ++i) {
    if (row_count[i] > hat) {
      hat = row_count[i];
      hat_i = i;
    }
  }
  double h = q_reg + hat * hat - hat;
  for (std::size_t i = 0; i < row_count.size(); ++i) {
    if (i == hat_i) continue;
    const double a = row_count[i];
    const double overlap = std::max(hat + a - n, 0.0);
    h += a * a - a - overlap * overlap + overlap;
  }
  choice.schur_estimate = h;
  choice.ratio = (n + m) > 0 && h > 0
                     ? n / (n + m) * choice.kkt_nnz * choice.kkt_nnz / (h * h)
                     : 0.0;

  switch (mode) {
    case LinsysMode::kkt:
      choice.kind = LinsysKind::kkt;
      break;
    case LinsysMode::schur:
      choice.kind = LinsysKind::schur;
      break;
    case LinsysMode::automatic:
      choice.kind = (A.rows() > 0 && choice.ratio < 2.0) ? LinsysKind::kkt
                                                         : LinsysKind::schur;
      break;
  }
  return choice;
}

SparseMatrix NewtonSystem::worst_case_pattern(const QpProblem& p,
                                              LinsysKind kind) {
  const Index n = p.n();
  const Index m = p.m();
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j) {
    t.push_back({j, j, 1.0});
    for (Index i : p.Q.col_rows(j)) t.push_back({i, j, 1.0});
  }
  if (kind == LinsysKind::kkt) {
    for (Index j = 0; j < n; ++j) {
      for (Index i : p.A.col_rows(j)) t.push_back({j, n + i, 1.0});
    }
    for (Index i = 0; i < m; ++i) t.push_back({n + i, n + i, 1.0});
    return SparseMatrix::from_triplets(n + m, n + m, t, Symmetry::upper);
  }
  const SparseMatrix at = p.A.transpose();
  for (Index i = 0; i < m; ++i) {
    auto cols = at.col_rows(i);
    for (std::size_t a = 0; a < cols.size(); ++a) {
      for (std::size_t b = a; b < cols.size(); ++b) {
        t.push_back({cols[a], cols[b], 1.0});
      }
    }
  }
  return SparseMatrix::from_triplets(n, n, t, Symmetry::upper);
}

NewtonSystem::NewtonSystem(const QpProblem& p, LinsysKind kind,
                           int max_rank_update, double max_rank_update_fraction,
                           Permutation perm)
    : p_(&p),
      kind_(kind),
      max_rank_update_(max_rank_update),
      max_rank_update_fraction_(max_rank_update_fraction),
      perm_(std::move(perm)),
      at_(p.A.transpose()) {
  const Index dim = kind == LinsysKind::kkt ? p.n() + p.m() : p.n();
  if (perm_.empty()) {
    perm_ = minimum_degree_ordering(worst_case_pattern(p, kind));
  } else if (!is_permutation(perm_, dim)) {
    throw std::invalid_argument("NewtonSystem: permutation has wrong size");
  }
}

void NewtonSystem::factorize(std::span<const double> sigma_y,
                             std::span<const double> sigma_x_inv) {
  const Index n = p_->n();
  const Index m = p_->m();
  std::vector<Triplet> t;
  const auto qt = p_->Q.triplets();
  t.reserve(qt.size() + static_cast<std::size_t>(n));
  t.insert(t.end(), qt.begin(), qt.end());
  for (Index j = 0; j < n; ++j) t.push_back({j, j, sigma_x_inv[j]});
  SparseMatrix k;
  if (kind_ == LinsysKind::kkt) {
    for (Index i = 0; i < m; ++i) {
      if (active_[i]) {
        auto cols = at_.col_rows(i);
        auto vals = at_.col_values(i);
        for (std::size_t a = 0; a < cols.size(); ++a) {
          t.push_back({cols[a], n + i, vals[a]});
        }
      }
      t.push_back({n + i, n + i, -1.0 / sigma_y[i]});
    }
    k = SparseMatrix::from_triplets(n + m, n + m, t, Symmetry::upper);
  } else {
    for (Index i = 0; i < m; ++i) {
      if (!active_[i]) continue;
      auto cols = at_.col_rows(i);
      auto vals = at_.col_values(i);
      for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a; b < cols.size(); ++b) {
          t.push_back({cols[a], cols[b], sigma_y[i] * vals[a] * vals[b]});
        }
      }
    }
    k = SparseMatrix::from_triplets(n, n, t, Symmetry::upper);
  }
  factored_ = false;
  factors_ = LdlFactors::factorize(k, perm_);
  sigma_snapshot_.assign(sigma_y.begin(), sigma_y.end());
  sigma_x_inv_.assign(sigma_x_inv.begin(), sigma_x_inv.end());
  factored_ = true;
  ++counters_.factorizations;
}

SparseVector NewtonSystem::kkt_column(Index i) const {
  SparseVector v;
  auto cols = at_.col_rows(i);
  auto vals = at_.col_values(i);
  v.indices.assign(cols.begin(), cols.end());
  v.values.assign(vals.begin(), vals.end());
  return factors_.to_factor_order(v);
}

SparseVector NewtonSystem::schur_vector(Index i, double weight) const {
  SparseVector v;
  auto cols = at_.col_rows(i);
  auto vals = at_.col_values(i);
  v.indices.assign(cols.begin(), cols.end());
  v.values.reserve(vals.size());
  for (double a : vals) v.values.push_back(weight * a);
  return factors_.to_factor_order(v);
}

bool NewtonSystem::try_update(const ActiveSet& active,
                              std::span<const double> sigma_y) {
  const Index n = p_->n();
  const Index m = p_->m();
  std::vector<Index> entered;
  std::vector<Index> left;
  std::vector<Index> reweighted;  // stays active, penalty changed
  std::vector<Index> placeholder; // stays inactive, penalty changed (KKT)
  for (Index i = 0; i < m; ++i) {
    const bool now = active.flags[i] != 0;
    const bool before = active_[i] != 0;
    const bool changed = sigma_y[i] != sigma_snapshot_[i];
    if (now && !before) {
      entered.push_back(i);
    } else if (!now && before) {
      left.push_back(i);
    } else if (changed && now) {
      reweighted.push_back(i);
    } else if (changed && kind_ == LinsysKind::kkt) {
      placeholder.push_back(i);
    }
  }
  if (entered.empty() && left.empty() && reweighted.empty() && placeholder.empty()) {
    return true;
  }
  const double limit = std::min(static_cast<double>(max_rank_update_),
                                max_rank_update_fraction_ * (n + m));
  if (static_cast<double>(entered.size() + left.size()) > limit) return false;
  if (static_cast<double>(reweighted.size()) > 0.5 * limit) return false;

  try {
    if (kind_ == LinsysKind::kkt) {
      for (Index i : placeholder) {
        factors_.set_decoupled_pivot(factors_.pinv()[n + i], -1.0 / sigma_y[i]);
      }
      for (Index i : left) {
        factors_.row_delete(factors_.pinv()[n + i], -1.0 / sigma_y[i]);
        ++counters_.row_modifications;
      }
      // only the diagonal entry -1/sigma_i of a reweighted row changes
      for (Index i : reweighted) {
        const double diff = 1.0 / sigma_snapshot_[i] - 1.0 / sigma_y[i];
        SparseVector w;
        w.indices.push_back(factors_.pinv()[n + i]);
        w.values.push_back(std::sqrt(std::abs(diff)));
        factors_.rank1_update(w, diff > 0 ? 1 : -1);
        ++counters_.rank1_updates;
      }
      for (Index i : entered) {
        factors_.row_add(factors_.pinv()[n + i], kkt_column(i), -1.0 / sigma_y[i]);
        ++counters_.row_modifications;
      }
    } else {
      // growth first so intermediate matrices stay positive definite
      for (Index i : entered) {
        factors_.rank1_update(schur_vector(i, std::sqrt(sigma_y[i])), 1);
        ++counters_.rank1_updates;
      }
      for (Index i : reweighted) {
        const double diff = sigma_y[i] - sigma_snapshot_[i];
        factors_.rank1_update(schur_vector(i, std::sqrt(std::abs(diff))),
                              diff > 0 ? 1 : -1);
        ++counters_.rank1_updates;
      }
      for (Index i : left) {
        factors_.rank1_update(schur_vector(i, std::sqrt(sigma_snapshot_[i])), -1);
        ++counters_.rank1_updates;
      }
    }
  } catch (const FactorizationError&) {
    factored_ = false;
    return false;
  }
  for (Index i = 0; i < m; ++i) {
    active_[i] = active.flags[i];
    if (kind_ == LinsysKind::kkt || active_[i]) sigma_snapshot_[i] = sigma_y[i];
  }
  ++counters_.update_rounds;
  return true;
}

bool NewtonSystem::refresh(const ActiveSet& active,
                           std::span<const double> sigma_y,
                           std::span<const double> sigma_x_inv,
                           bool force_refactor) {
  const auto m = static_cast<std::size_t>(p_->m());
  if (active.flags.size() != m || sigma_y.size() != m ||
      sigma_x_inv.size() != static_cast<std::size_t>(p_->n())) {
    throw std::invalid_argument("NewtonSystem::refresh: dimension mismatch");
  }
  const bool sx_changed =
      !factored_ || !std::equal(sigma_x_inv.begin(), sigma_x_inv.end(),
                                sigma_x_inv_.begin(), sigma_x_inv_.end());
  if (!force_refactor && !sx_changed && try_update(active, sigma_y)) {
    return false;
  }
  active_ = active.flags;
  factorize(sigma_y, sigma_x_inv);
  return true;
}

Vector NewtonSystem::direction(std::span<const double> grad) {
  if (!factored_) throw std::logic_error("NewtonSystem::direction: not factored");
  const auto n = static_cast<std::size_t>(p_->n());
  if (grad.size() != n) throw std::invalid_argument("NewtonSystem::direction: size mismatch");
  ++counters_.solves;
  if (kind_ == LinsysKind::schur) {
    Vector d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = -grad[j];
    factors_.solve_in_place(d);
    return d;
  }
  Vector rhs(n + static_cast<std::size_t>(p_->m()), 0.0);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = -grad[j];
  factors_.solve_in_place(rhs);
  lambda_.assign(rhs.begin() + static_cast<std::ptrdiff_t>(n), rhs.end());
  rhs.resize(n);
  return rhs;
}

}  // namespace qpalm
