#pragma once

#include <span>

#include "qpalm/sparse_matrix.hpp"

namespace qpalm {

/// minimize 1/2 x'Qx + q'x  subject to  l <= Ax <= u.
///
/// Q is stored as an upper triangle (Symmetry::upper). Bounds may be
/// infinite; equality rows have l_i == u_i.
struct QpProblem {
  SparseMatrix Q;
  Vector q;
  SparseMatrix A;
  Vector l;
  Vector u;

  Index n() const { return Q.rows(); }
  Index m() const { return A.rows(); }

  /// Throws std::invalid_argument naming the first violated requirement.
  void validate() const;

  double objective(std::span<const double> x) const;
};

/// Componentwise projection onto [l, u].
void project_box(std::span<const double> v, std::span<const double> l,
                 std::span<const double> u, std::span<double> out);

}  // namespace qpalm
