#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qpalm/newton.hpp"
#include "qpalm/problem.hpp"
#include "qpalm/scaling.hpp"
#include "qpalm/settings.hpp"

namespace qpalm {

enum class Status { solved, primal_infeasible, dual_infeasible, max_iter, time_limit, stalled };

std::string_view to_string(Status s);
Status parse_status(std::string_view s);
/// Solved, or infeasible with a certificate.
bool is_success(Status s);

struct SolveInfo {
  int outer_iterations = 0;
  long newton_iterations = 0;
  long factorizations = 0;
  long update_rounds = 0;
  long rank1_updates = 0;
  long row_modifications = 0;
  double setup_time = 0.0;  // seconds
  double solve_time = 0.0;
  double runtime = 0.0;     // setup + solve
  LinsysKind linsys = LinsysKind::schur;
  double linsys_ratio = 0.0;
  double lambda_star = 0.0;    // nonconvex mode
  double sigma_x_inv = 0.0;    // initial proximal weight (inverse)
  double c = 1.0;              // objective scaling
  bool proximal_lowered = false;
  std::string message;
};

struct SolveResult {
  Status status = Status::max_iter;
  Vector x;
  Vector y;
  double objective = 0.0;
  double prim_res = 0.0;
  double dual_res = 0.0;
  std::optional<Vector> certificate;
  SolveInfo info;
};

/// Per outer iteration audit record (scaled quantities).
struct OuterTrace {
  int k = 0;
  int inner_iterations = 0;
  bool xhat_updated = false;
  bool primal_criterion = false;  // outer primal test with eps_{a,k}, eps_{r,k}
  double eps_abs_k = 0.0;
  double eps_rel_k = 0.0;
  double delta_abs_k = 0.0;
  double delta_rel_k = 0.0;
  std::span<const double> sigma_y;  // after the update of this iteration
  std::span<const double> sigma_x_inv;
  std::span<const double> xhat;
};

/// Solver instance bound to one problem. Ruiz scalings are computed at
/// construction and reused by every solve; the objective scaling depends on
/// the starting point and is recomputed per solve.
class Solver {
 public:
  explicit Solver(QpProblem problem, Settings settings = {});

  SolveResult solve(std::span<const double> x0 = {}, std::span<const double> y0 = {});

  /// Data updates with unchanged sparsity; scalings D and E are kept.
  void update_q(Vector q);
  void update_bounds(Vector l, Vector u);
  void update_settings(const Settings& settings);

  void set_observer(std::function<void(const OuterTrace&)> observer) {
    observer_ = std::move(observer);
  }

  const QpProblem& problem() const { return problem_; }
  const Settings& settings() const { return settings_; }
  /// Scaling of the most recent solve.
  const ScalingData& scaling() const { return scaling_; }

 private:
  QpProblem problem_;
  Settings settings_;
  Vector D_;
  Vector E_;
  SparseMatrix A_scaled_;
  ScalingData scaling_;
  LinsysChoice linsys_;
  Permutation perm_;
  double setup_time_ = 0.0;
  std::function<void(const OuterTrace&)> observer_;
};

SolveResult solve(const QpProblem& problem, const Settings& settings = {},
                  std::span<const double> x0 = {}, std::span<const double> y0 = {});

struct SubproblemResult {
  Vector x;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Minimizes the proximal augmented Lagrangian subproblem
///   f(x) + dist^2_{Sigma_y}(Ax + Sigma_y^{-1} y) + 1/2||x - xhat||^2_{Sigma_x^{-1}}
/// with the same semismooth Newton and exact linesearch steps as the solver,
/// without scaling, stopping when ||grad||_inf <= tol.
SubproblemResult minimize_subproblem(const QpProblem& p, std::span<const double> xhat,
                                     std::span<const double> y,
                                     std::span<const double> sigma_y,
                                     std::span<const double> sigma_x_inv,
                                     std::span<const double> x_start,
                                     double tol = 1e-12, int max_iter = 100,
                                     LinsysMode mode = LinsysMode::automatic);

}  // namespace qpalm
