#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "qpalm/problem.hpp"

namespace qpalm {

/// Lifted portfolio problem in (x, y) with r = ceil(n/10) factors:
///   minimize  x'Dx + y'y - mu'x / beta
///   s.t.      x >= 0, sum(x) = 1, y - F'x = 0.
/// Rows are ordered as the n bounds on x, the budget row, then the r
/// factor rows.
QpProblem gen_portfolio(Index n, std::uint64_t seed, double beta = 1.0);

struct MpcOptions {
  Index nx = 10;
  Index nu = 5;
  Index horizon = 10;
  std::uint64_t seed = 0;
  /// Initial state as a fraction of the state bounds (random signs).
  double init_fraction = 0.5;
  /// Spectral radius cap for the random system matrix.
  double max_spectral_radius = 1.2;
};

/// Optimal control problem in z = (x0, u0, x1, ..., u_{N-1}, xN). Terminal
/// cost and set reuse the stage cost Q and the state box.
struct MpcInstance {
  QpProblem qp;
  Index nx = 0;
  Index nu = 0;
  Index horizon = 0;
  Vector a;        // nx x nx, row-major
  Vector b;        // nx x nu, row-major
  Vector x_bound;  // |x| <= x_bound
  Vector u_bound;
  Vector x_init;

  Index state_offset(Index k) const { return k * (nx + nu); }
  Index input_offset(Index k) const { return k * (nx + nu) + nx; }
  /// x_{k+1} = A x_k + B u_k.
  Vector step(std::span<const double> x, std::span<const double> u) const;
};

MpcInstance gen_mpc(const MpcOptions& options);
QpProblem gen_mpc(Index nx, Index nu, Index horizon, std::uint64_t seed);

/// Rewrites the initial-state rows of `inst.qp` to x_init.
void set_initial_state(MpcInstance& inst, std::span<const double> x_init);

/// Shifts a solution one sample forward: stage blocks move one step left and
/// the last block is duplicated; dynamics multipliers shift alike.
std::pair<Vector, Vector> shift_warm_start(const MpcInstance& inst,
                                           std::span<const double> z,
                                           std::span<const double> y);

struct RandomQpOptions {
  Index n = 10;
  Index m = 10;
  double density = 0.3;
  bool convex = true;
  std::uint64_t seed = 0;
  /// Nonconvex mode: smallest eigenvalue of Q; the others are drawn
  /// uniformly on [min_eig, max_eig].
  double min_eig = -1.0;
  double max_eig = 10.0;
  /// Probability that a bound is dropped (set to +-inf).
  double infinite_bound_fraction = 0.0;
  /// Probability that a row becomes an equality.
  double equality_fraction = 0.0;
};

/// Random QP with bounds enclosing a known feasible point. Convex mode uses
/// Q = G'G + 1e-2 I with G sparse; nonconvex mode a dense Q = V diag(lambda) V'.
QpProblem gen_random_qp(const RandomQpOptions& options);
QpProblem gen_random_qp(Index n, Index m, double density, bool convex, std::uint64_t seed);

}  // namespace qpalm
