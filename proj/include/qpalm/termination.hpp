#pragma once

#include <span>

#include "qpalm/lobpcg.hpp"
#include "qpalm/problem.hpp"
#include "qpalm/scaling.hpp"
#include "qpalm/settings.hpp"

namespace qpalm {

/// Unscaled residuals of an iterate of the scaled problem, together with the
/// magnitudes entering the relative tolerances.
struct ResidualNorms {
  double prim_res = 0.0;    // ||E^{-1}(Abar xbar - zbar)||
  double prim_scale = 0.0;  // max(||E^{-1} Abar xbar||, ||E^{-1} zbar||)
  double dual_res = 0.0;    // (1/c)||D^{-1}(Qbar xbar + qbar + Abar' ybar)||
  double dual_scale = 0.0;  // (1/c) max(||D^{-1}Qbar xbar||, ||D^{-1}qbar||, ||D^{-1}Abar' ybar||)
  double inner_res = 0.0;   // dual_res with the proximal term added
};

/// `qx` = Qbar xbar, `aty` = Abar' ybar, `ax` = Abar xbar; `prox` is
/// Sigma_x^{-1}(xbar - xhat) (may be empty, then inner_res = dual_res).
ResidualNorms residual_norms(const QpProblem& scaled, const ScalingData& s,
                             std::span<const double> qx,
                             std::span<const double> aty,
                             std::span<const double> ax,
                             std::span<const double> z,
                             std::span<const double> prox);

inline bool primal_converged(const ResidualNorms& r, double eps_abs, double eps_rel) {
  return r.prim_res <= eps_abs + eps_rel * r.prim_scale;
}
inline bool dual_converged(const ResidualNorms& r, double eps_abs, double eps_rel) {
  return r.dual_res <= eps_abs + eps_rel * r.dual_scale;
}
inline bool inner_converged(const ResidualNorms& r, double delta_abs, double delta_rel) {
  return r.inner_res <= delta_abs + delta_rel * r.dual_scale;
}

enum class TerminationCheck { none, solved, inner_done };

TerminationCheck check_termination(const ResidualNorms& r, double eps_abs,
                                   double eps_rel, double delta_abs,
                                   double delta_rel);

struct InfeasibilityCheck {
  bool detected = false;
  Vector certificate;  // unscaled, filled when detected
};

/// dy = Sigma_y(Abar xbar - zbar). Certificate (1/c) E dy.
InfeasibilityCheck check_primal_infeasibility(const QpProblem& scaled,
                                              const ScalingData& s,
                                              std::span<const double> dy,
                                              double eps_pinf);

/// dx = the last accepted inner step. Certificate D dx. The curvature test
/// of the nonconvex variant measures the step in unscaled coordinates,
/// dx' Qbar dx <= -c eps^2 ||D dx||^2.
InfeasibilityCheck check_dual_infeasibility(const QpProblem& scaled,
                                            const ScalingData& s,
                                            std::span<const double> dx,
                                            double eps_dinf, bool nonconvex);

/// Initial penalties: every entry equals
/// clamp(sigma_init max(1, |f(x0)|) / max(1, 1/2 ||A x0 - z0||^2), 1e-4, 1e4)
/// with z0 = clamp(A x0, l, u), all on the scaled problem.
Vector init_sigma(const QpProblem& scaled, std::span<const double> x0,
                  double sigma_init);

/// Penalty update. Entries whose residual dropped below theta times the
/// previous one are kept; others grow by
/// min(sigma_max/sigma_i, max(Delta |r_i|/||r||_inf, 1)). Returns the number
/// of changed entries.
int update_sigma(std::span<double> sigma_y, std::span<const double> residual,
                 std::span<const double> residual_prev, double theta,
                 double delta, double sigma_max);

struct ProximalChoice {
  Vector sigma_x_inv;
  double lambda_star = 0.0;   // lower bound used (nonconvex mode)
  bool used_eigen = false;
  bool used_gershgorin = false;
  EigEstimate eig;
};

/// Convex mode: Sigma_x^{-1} = 1/gamma_init. Nonconvex mode: lower bound
/// lambda* on lambda_min(Qbar); if negative Sigma_x^{-1} = |lambda* - 1e-6|.
/// An unconverged eigenvalue run falls back to the Gershgorin bound.
ProximalChoice select_proximal(const QpProblem& scaled, const Settings& settings);

}  // namespace qpalm
