#pragma once

#include <span>
#include <utility>

#include "qpalm/problem.hpp"

namespace qpalm {

/// Diagonal scalings relating the original problem to the solved one:
/// xbar = D^{-1} x, ybar = c E^{-1} y, Qbar = c D Q D, qbar = c D q,
/// Abar = E A D, lbar = E l, ubar = E u.
struct ScalingData {
  Vector D;
  Vector E;
  double c = 1.0;
  Vector Dinv;
  Vector Einv;
  double cinv = 1.0;

  static ScalingData identity(Index n, Index m);
  /// Fills the reciprocals from D, E and c.
  void refresh_inverses();
};

struct RuizResult {
  Vector D;
  Vector E;
  SparseMatrix A_scaled;
};

/// `iters` sweeps of Ruiz equilibration on A. Each sweep takes square roots
/// of the row and column infinity norms of the current scaled matrix (both
/// from the same pre-sweep matrix) and rescales; the scaled matrix is
/// recomputed from A at the end of every sweep. Zero rows/columns keep
/// factor 1.
RuizResult ruiz_equilibrate(const SparseMatrix& A, int iters);

/// c = 1 / max(1, ||D (Q x0 + q)||_inf).
double objective_scaling(const QpProblem& p, std::span<const double> D,
                         std::span<const double> x0);

/// Applies given scalings to every piece of problem data.
QpProblem apply_scaling(const QpProblem& p, const ScalingData& s);

struct ScaledProblem {
  QpProblem problem;
  ScalingData scaling;
};

/// Ruiz equilibration of A followed by objective scaling at x0 (empty x0
/// means the zero vector).
ScaledProblem scale_problem(const QpProblem& p, std::span<const double> x0,
                            int iters);

/// Recovers the original data from a scaled problem.
QpProblem unscale_problem(const QpProblem& scaled, const ScalingData& s);

/// x = D xbar, y = c^{-1} E ybar.
std::pair<Vector, Vector> unscale_solution(std::span<const double> xbar,
                                           std::span<const double> ybar,
                                           const ScalingData& s);

}  // namespace qpalm
