#pragma once

#include <cmath>
#include <string_view>

namespace qpalm {

enum class LinsysMode { automatic, kkt, schur };

LinsysMode parse_linsys_mode(std::string_view s);
std::string_view to_string(LinsysMode mode);

/// Solver parameters. Defaults follow the reference parameter table of the
/// method; the limits at the bottom are additions of this implementation.
struct Settings {
  double eps_abs = 1e-4;
  double eps_rel = 1e-4;
  double delta_abs0 = 1.0;  // initial inner tolerances
  double delta_rel0 = 1.0;
  double eps_pinf = 1e-5;
  double eps_dinf = 1e-5;
  double rho = 0.1;           // tolerance reduction factor
  double theta = 0.25;        // sufficient residual decrease ratio
  double delta = 100.0;       // penalty growth factor
  double sigma_init = 20.0;
  double sigma_max = 1e9;
  double gamma_init = 1e7;    // proximal weight in the convex case
  double gamma_upd = 10.0;
  double gamma_max = 1e7;
  bool gamma_update = false;  // available, off by default
  int scaling_iters = 10;
  int max_rank_update = 160;
  double max_rank_update_fraction = 0.1;
  bool nonconvex = false;
  LinsysMode linsys = LinsysMode::automatic;

  int max_outer_iter = 10000;
  long max_total_newton_iter = 10000000;
  double time_limit = INFINITY;  // seconds
  int inner_max_iter = 100;
  bool warm_start = true;        // use (x0, y0) when given
  double eig_eps = 1e-5;
  int eig_max_iter = 10000;
  /// Evaluate the dual residual at the trial multiplier (default) instead of
  /// the multiplier of the current outer iteration.
  bool dual_residual_at_trial = true;
  /// Convex mode: lower the proximal term to 1e-12 after this many outer
  /// iterations with primal feasibility reached but no termination (0 = off).
  int proximal_stall_iters = 10;

  /// Throws std::invalid_argument when a value is out of range.
  void validate() const;
};

}  // namespace qpalm
