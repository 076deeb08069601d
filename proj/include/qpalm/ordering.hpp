#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qpalm/sparse_matrix.hpp"

namespace qpalm {

/// A permutation `perm` maps factor positions to original indices:
/// row k of P K P^T is row perm[k] of K.
using Permutation = std::vector<Index>;

/// Fill-reducing minimum degree ordering of a symmetric pattern.
///
/// Greedy elimination on the explicit elimination graph: the node of least
/// current degree is eliminated next (ties broken by lowest index) and its
/// neighbours are joined into a clique. Degrees are exact for the
/// elimination graph. Values are ignored; only the pattern matters.
Permutation minimum_degree_ordering(const SparseMatrix& pattern);

Permutation identity_permutation(Index n);
Permutation invert_permutation(std::span<const Index> perm);
bool is_permutation(std::span<const Index> perm, Index n);

/// Upper triangle of P K P^T given the inverse permutation pinv
/// (pinv[i] = position of original index i).
SparseMatrix symmetric_permute(const SparseMatrix& upper,
                               std::span<const Index> pinv);

/// Elimination tree of an upper-stored symmetric matrix (parent -1 = root).
std::vector<Index> elimination_tree(const SparseMatrix& upper);

/// Strictly-lower nonzero count of the LDL^T factor of P K P^T.
std::size_t factor_nnz(const SparseMatrix& pattern, std::span<const Index> perm);

}  // namespace qpalm
