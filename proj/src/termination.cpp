#include "qpalm/termination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpalm {

namespace {

double scaled_inf_norm(std::span<const double> v, std::span<const double> w) {
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(w[i] * v[i]));
  return r;
}

}  // namespace

ResidualNorms residual_norms(const QpProblem& scaled, const ScalingData& s,
                             std::span<const double> qx,
                             std::span<const double> aty,
                             std::span<const double> ax,
                             std::span<const double> z,
                             std::span<const double> prox) {
  const std::size_t n = qx.size();
  const std::size_t m = ax.size();
  ResidualNorms r;
  double dual = 0.0;
  double inner = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double g = qx[j] + scaled.q[j] + aty[j];
    dual = std::max(dual, std::abs(s.Dinv[j] * g));
    if (!prox.empty()) inner = std::max(inner, std::abs(s.Dinv[j] * (g + prox[j])));
  }
  r.dual_res = s.cinv * dual;
  r.inner_res = prox.empty() ? r.dual_res : s.cinv * inner;
  r.dual_scale = s.cinv * std::max({scaled_inf_norm(qx, s.Dinv),
                                    scaled_inf_norm(scaled.q, s.Dinv),
                                    scaled_inf_norm(aty, s.Dinv)});
  double prim = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    prim = std::max(prim, std::abs(s.Einv[i] * (ax[i] - z[i])));
  }
  r.prim_res = prim;
  r.prim_scale = std::max(scaled_inf_norm(ax, s.Einv), scaled_inf_norm(z, s.Einv));
  return r;
}

TerminationCheck check_termination(const ResidualNorms& r, double eps_abs,
                                   double eps_rel, double delta_abs,
                                   double delta_rel) {
  if (primal_converged(r, eps_abs, eps_rel) && dual_converged(r, eps_abs, eps_rel)) {
    return TerminationCheck::solved;
  }
  if (inner_converged(r, delta_abs, delta_rel)) return TerminationCheck::inner_done;
  return TerminationCheck::none;
}

InfeasibilityCheck check_primal_infeasibility(const QpProblem& scaled,
                                              const ScalingData& s,
                                              std::span<const double> dy,
                                              double eps_pinf) {
  InfeasibilityCheck res;
  const double edy = scaled_inf_norm(dy, s.E);
  if (edy == 0.0) return res;
  const Vector aty = scaled.A.multiply_transpose(dy);
  if (scaled_inf_norm(aty, s.Dinv) > eps_pinf * edy) return res;
  double support = 0.0;
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (dy[i] > 0.0) {
      support += scaled.u[i] * dy[i];
    } else if (dy[i] < 0.0) {
      support += scaled.l[i] * dy[i];
    }
  }
  if (!(support <= -eps_pinf * edy)) return res;
  res.detected = true;
  res.certificate.resize(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) res.certificate[i] = s.cinv * s.E[i] * dy[i];
  return res;
}

InfeasibilityCheck check_dual_infeasibility(const QpProblem& scaled,
                                            const ScalingData& s,
                                            std::span<const double> dx,
                                            double eps_dinf, bool nonconvex) {
  InfeasibilityCheck res;
  const double ndx = scaled_inf_norm(dx, s.D);
  if (ndx == 0.0) return res;
  const Vector ad = scaled.A.multiply(dx);
  const double bound = eps_dinf * ndx;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double v = s.Einv[i] * ad[i];
    const bool lower_finite = std::isfinite(scaled.l[i]);
    const bool upper_finite = std::isfinite(scaled.u[i]);
    if (lower_finite && upper_finite) {
      if (std::abs(v) > bound) return res;
    } else if (lower_finite) {
      if (v < -bound) return res;
    } else if (upper_finite) {
      if (v > bound) return res;
    }
  }
  const Vector qd = scaled.Q.multiply(dx);
  bool ray = scaled_inf_norm(qd, s.Dinv) <= s.c * bound &&
             dot(scaled.q, dx) <= -s.c * bound;
  bool curvature = false;
  if (!ray && nonconvex) {
    double nrm2 = 0.0;
    for (std::size_t j = 0; j < dx.size(); ++j) nrm2 += (s.D[j] * dx[j]) * (s.D[j] * dx[j]);
    curvature = dot(dx, qd) <= -s.c * eps_dinf * eps_dinf * nrm2;
  }
  if (!ray && !curvature) return res;
  res.detected = true;
  res.certificate.resize(dx.size());
  for (std::size_t j = 0; j < dx.size(); ++j) res.certificate[j] = s.D[j] * dx[j];
  return res;
}

Vector init_sigma(const QpProblem& scaled, std::span<const double> x0,
                  double sigma_init) {
  const double f = scaled.objective(x0);
  const Vector ax = scaled.A.multiply(x0);
  double viol = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double z = std::min(std::max(ax[i], scaled.l[i]), scaled.u[i]);
    viol += (ax[i] - z) * (ax[i] - z);
  }
  viol *= 0.5;
  const double value = std::clamp(
      sigma_init * std::max(1.0, std::abs(f)) / std::max(1.0, viol), 1e-4, 1e4);
  return Vector(ax.size(), value);
}

int update_sigma(std::span<double> sigma_y, std::span<const double> residual,
                 std::span<const double> residual_prev, double theta,
                 double delta, double sigma_max) {
  const double rmax = norm_inf(residual);
  if (rmax == 0.0) return 0;
  int changed = 0;
  for (std::size_t i = 0; i < sigma_y.size(); ++i) {
    const double ri = std::abs(residual[i]);
    if (ri < theta * std::abs(residual_prev[i])) continue;
    // clamp the product, not the factor, so the cap is hit exactly
    const double next =
        std::min(sigma_max, sigma_y[i] * std::max(delta * ri / rmax, 1.0));
    if (next > sigma_y[i]) {
      sigma_y[i] = next;
      ++changed;
    }
  }
  return changed;
}

ProximalChoice select_proximal(const QpProblem& scaled, const Settings& settings) {
  ProximalChoice choice;
  const auto n = static_cast<std::size_t>(scaled.n());
  choice.sigma_x_inv.assign(n, 1.0 / settings.gamma_init);
  if (!settings.nonconvex || n == 0) return choice;
  choice.eig = min_eigenvalue(scaled.Q, default_eig_start(scaled.n()),
                              settings.eig_eps, settings.eig_max_iter);
  choice.used_eigen = true;
  if (choice.eig.converged) {
    choice.lambda_star = choice.eig.lambda_lb;
  } else {
    choice.lambda_star = gershgorin_lower_bound(scaled.Q);
    choice.used_gershgorin = true;
  }
  if (choice.lambda_star < 0.0) {
    choice.sigma_x_inv.assign(n, std::abs(choice.lambda_star - 1e-6));
  }
  return choice;
}

}  // namespace qpalm
