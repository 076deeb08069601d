#include "qpalm/ordering.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

namespace qpalm {

namespace {

void require_square_symmetric(const SparseMatrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  }
  if (!m.is_symmetric()) {
    throw std::invalid_argument(std::string(who) +
                                ": matrix must be flagged symmetric");
  }
}

}  // namespace

Permutation minimum_degree_ordering(const SparseMatrix& pattern) {
  require_square_symmetric(pattern, "minimum_degree_ordering");
  const Index n = pattern.rows();

  // adjacency without self loops, sorted
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i : pattern.col_rows(j)) {
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  using Entry = std::pair<Index, Index>;  // (degree, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (Index i = 0; i < n; ++i) heap.push({static_cast<Index>(adj[i].size()), i});

  std::vector<char> eliminated(static_cast<std::size_t>(n), 0);
  Permutation perm;
  perm.reserve(static_cast<std::size_t>(n));
  std::vector<Index> merged;

  while (!heap.empty()) {
    const auto [deg, v] = heap.top();
    heap.pop();
    if (eliminated[v] || deg != static_cast<Index>(adj[v].size())) continue;
    eliminated[v] = 1;
    perm.push_back(v);

    const std::vector<Index> clique = std::move(adj[v]);
    adj[v].clear();
    for (Index u : clique) {
      auto& au = adj[u];
      merged.clear();
      merged.reserve(au.size() + clique.size());
      std::set_union(au.begin(), au.end(), clique.begin(), clique.end(),
                     std::back_inserter(merged));
      std::erase_if(merged, [&](Index w) { return w == u || w == v; });
      au.swap(merged);
      heap.push({static_cast<Index>(au.size()), u});
    }
  }
  return perm;
}

Permutation identity_permutation(Index n) {
  Permutation p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Permutation invert_permutation(std::span<const Index> perm) {
  Permutation pinv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    pinv[perm[k]] = static_cast<Index>(k);
  }
  return pinv;
}

bool is_permutation(std::span<const Index> perm, Index n) {
  if (perm.size() != static_cast<std::size_t>(n)) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index p : perm) {
    if (p < 0 || p >= n || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

SparseMatrix symmetric_permute(const SparseMatrix& upper,
                               std::span<const Index> pinv) {
  require_square_symmetric(upper, "symmetric_permute");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(upper.nnz()));
  for (Index j = 0; j < upper.cols(); ++j) {
    auto rows = upper.col_rows(j);
    auto vals = upper.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      const Index a = pinv[rows[p]];
      const Index b = pinv[j];
      t.push_back({std::min(a, b), std::max(a, b), vals[p]});
    }
  }
  return SparseMatrix::from_triplets(upper.rows(), upper.cols(), t,
                                     Symmetry::upper);
}

std::vector<Index> elimination_tree(const SparseMatrix& upper) {
  const Index n = upper.cols();
  std::vector<Index> parent(static_cast<std::size_t>(n), -1);
  std::vector<Index> ancestor(static_cast<std::size_t>(n), -1);
  for (Index k = 0; k < n; ++k) {
    for (Index i : upper.col_rows(k)) {
      while (i != -1 && i < k) {
        const Index next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) parent[i] = k;
        i = next;
      }
    }
  }
  return parent;
}

std::size_t factor_nnz(const SparseMatrix& pattern, std::span<const Index> perm) {
  require_square_symmetric(pattern, "factor_nnz");
  if (!is_permutation(perm, pattern.rows())) {
    throw std::invalid_argument("factor_nnz: invalid permutation");
  }
  const auto c = symmetric_permute(pattern, invert_permutation(perm));
  const auto parent = elimination_tree(c);
  const Index n = c.cols();
  std::vector<Index> flag(static_cast<std::size_t>(n), -1);
  std::size_t count = 0;
  for (Index k = 0; k < n; ++k) {
    flag[k] = k;
    for (Index i : c.col_rows(k)) {
      for (; i < k && flag[i] != k; i = parent[i]) {
        flag[i] = k;
        ++count;
      }
    }
  }
  return count;
}

}  // namespace qpalm
