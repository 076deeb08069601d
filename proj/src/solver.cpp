#include "qpalm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "qpalm/linesearch.hpp"
#include "qpalm/termination.hpp"

namespace qpalm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kTinyStep = 1e-16;
constexpr double kLoweredProximal = 1e-12;

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::solved: return "solved";
    case Status::primal_infeasible: return "primal_infeasible";
    case Status::dual_infeasible: return "dual_infeasible";
    case Status::max_iter: return "max_iter";
    case Status::time_limit: return "time_limit";
    case Status::stalled: return "stalled";
  }
  return "stalled";
}

Status parse_status(std::string_view s) {
  for (Status st : {Status::solved, Status::primal_infeasible, Status::dual_infeasible,
                    Status::max_iter, Status::time_limit, Status::stalled}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

bool is_success(Status s) {
  return s == Status::solved || s == Status::primal_infeasible ||
         s == Status::dual_infeasible;
}

Solver::Solver(QpProblem problem, Settings settings)
    : problem_(std::move(problem)), settings_(settings) {
  const auto t0 = Clock::now();
  problem_.validate();
  settings_.validate();
  auto ruiz = ruiz_equilibrate(problem_.A, settings_.scaling_iters);
  D_ = std::move(ruiz.D);
  E_ = std::move(ruiz.E);
  A_scaled_ = std::move(ruiz.A_scaled);
  linsys_ = select_linsys(problem_.Q, problem_.A, settings_.linsys);
  perm_ = minimum_degree_ordering(NewtonSystem::worst_case_pattern(problem_, linsys_.kind));
  scaling_ = ScalingData::identity(problem_.n(), problem_.m());
  setup_time_ = seconds_since(t0);
}

void Solver::update_q(Vector q) {
  if (q.size() != problem_.q.size()) throw std::invalid_argument("update_q: size mismatch");
  problem_.q = std::move(q);
  problem_.validate();
}

void Solver::update_bounds(Vector l, Vector u) {
  if (l.size() != problem_.l.size() || u.size() != problem_.u.size()) {
    throw std::invalid_argument("update_bounds: size mismatch");
  }
  problem_.l = std::move(l);
  problem_.u = std::move(u);
  problem_.validate();
}

void Solver::update_settings(const Settings& settings) {
  settings.validate();
  const bool rescale = settings.scaling_iters != settings_.scaling_iters;
  const bool relinsys = settings.linsys != settings_.linsys;
  settings_ = settings;
  if (rescale) {
    auto ruiz = ruiz_equilibrate(problem_.A, settings_.scaling_iters);
    D_ = std::move(ruiz.D);
    E_ = std::move(ruiz.E);
    A_scaled_ = std::move(ruiz.A_scaled);
  }
  if (relinsys) {
    linsys_ = select_linsys(problem_.Q, problem_.A, settings_.linsys);
    perm_ = minimum_degree_ordering(NewtonSystem::worst_case_pattern(problem_, linsys_.kind));
  }
}

SolveResult Solver::solve(std::span<const double> x0, std::span<const double> y0) {
  const auto t0 = Clock::now();
  const Settings& st = settings_;
  const auto n = static_cast<std::size_t>(problem_.n());
  const auto m = static_cast<std::size_t>(problem_.m());
  if (!x0.empty() && x0.size() != n) throw std::invalid_argument("solve: x0 has wrong length");
  if (!y0.empty() && y0.size() != m) throw std::invalid_argument("solve: y0 has wrong length");
  const bool use_x0 = st.warm_start && !x0.empty();
  const bool use_y0 = st.warm_start && !y0.empty();
  Vector x_start = use_x0 ? Vector(x0.begin(), x0.end()) : Vector(n, 0.0);

  // scaling
  ScalingData& s = scaling_;
  s.D = D_;
  s.E = E_;
  s.c = objective_scaling(problem_, s.D, x_start);
  s.refresh_inverses();
  QpProblem sp = apply_scaling(problem_, s);
  sp.A = A_scaled_;

  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = s.Dinv[j] * x_start[j];
  Vector y(m, 0.0);
  if (use_y0) {
    for (std::size_t i = 0; i < m; ++i) y[i] = s.c * s.Einv[i] * y0[i];
  }
  Vector xhat = x;

  Vector sigma_y = init_sigma(sp, x, st.sigma_init);
  const ProximalChoice prox = select_proximal(sp, st);
  Vector sxi = prox.sigma_x_inv;

  NewtonSystem sys(sp, linsys_.kind, st.max_rank_update, st.max_rank_update_fraction, perm_);

  double eps_a_k = st.delta_abs0;
  double eps_r_k = st.delta_rel0;
  double delta_a = st.delta_abs0;
  double delta_r = st.delta_rel0;

  Vector dx(n, 0.0);
  bool have_dx = false;
  Vector residual_prev(m);
  {
    const Vector ax = sp.A.multiply(x);
    for (std::size_t i = 0; i < m; ++i) {
      const double z = std::clamp(ax[i] + y[i] / sigma_y[i], sp.l[i], sp.u[i]);
      residual_prev[i] = ax[i] - z;
    }
  }

  ActiveSet active;
  active.flags.assign(m, 0);
  long newton_total = 0;
  bool refactored_for_tiny_step = false;
  int prox_stall = 0;
  bool prox_lowered = false;

  SolveResult result;
  result.info.linsys = linsys_.kind;
  result.info.linsys_ratio = linsys_.ratio;
  result.info.lambda_star = prox.lambda_star;
  result.info.sigma_x_inv = sxi.empty() ? 0.0 : sxi.front();
  result.info.c = s.c;

  ResidualNorms norms;
  int outer = 0;

  auto finish = [&](Status status, std::span<const double> xs,
                    std::span<const double> ys) -> SolveResult {
    auto [xu, yu] = unscale_solution(xs, ys, s);
    result.status = status;
    result.x = std::move(xu);
    result.y = std::move(yu);
    result.objective = problem_.objective(result.x);
    result.prim_res = norms.prim_res;
    result.dual_res = norms.dual_res;
    const auto& c = sys.counters();
    result.info.outer_iterations = outer;
    result.info.newton_iterations = newton_total;
    result.info.factorizations = c.factorizations;
    result.info.update_rounds = c.update_rounds;
    result.info.rank1_updates = c.rank1_updates;
    result.info.row_modifications = c.row_modifications;
    result.info.proximal_lowered = prox_lowered;
    result.info.setup_time = setup_time_;
    result.info.solve_time = seconds_since(t0);
    result.info.runtime = result.info.setup_time + result.info.solve_time;
    return std::move(result);
  };

  Vector aty(n);
  Vector prox_term(n);
  Vector shifted(m);
  Vector dy(m);

  for (outer = 0; outer < st.max_outer_iter; ++outer) {
    SubproblemGradient g;
    int nu = 0;
    for (;; ++nu) {
      g = subproblem_gradient(sp, x, xhat, y, sigma_y, sxi);
      for (std::size_t j = 0; j < n; ++j) prox_term[j] = sxi[j] * (x[j] - xhat[j]);
      sp.A.multiply_transpose(g.ytrial, aty);
      norms = residual_norms(sp, s, g.qx, aty, g.ax, g.z, prox_term);
      if (!st.dual_residual_at_trial) {
        const Vector aty_k = sp.A.multiply_transpose(y);
        const auto at_k = residual_norms(sp, s, g.qx, aty_k, g.ax, g.z, {});
        norms.dual_res = at_k.dual_res;
      }
      if (primal_converged(norms, st.eps_abs, st.eps_rel) &&
          dual_converged(norms, st.eps_abs, st.eps_rel)) {
        return finish(Status::solved, x, g.ytrial);
      }
      for (std::size_t i = 0; i < m; ++i) dy[i] = g.ytrial[i] - y[i];
      auto pinf = check_primal_infeasibility(sp, s, dy, st.eps_pinf);
      if (pinf.detected) {
        result.certificate = std::move(pinf.certificate);
        return finish(Status::primal_infeasible, x, g.ytrial);
      }
      if (have_dx) {
        auto dinf = check_dual_infeasibility(sp, s, dx, st.eps_dinf, st.nonconvex);
        if (dinf.detected) {
          result.certificate = std::move(dinf.certificate);
          return finish(Status::dual_infeasible, x, g.ytrial);
        }
      }
      if (inner_converged(norms, delta_a, delta_r)) break;
      if (nu >= st.inner_max_iter) break;
      if (seconds_since(t0) + setup_time_ > st.time_limit) {
        return finish(Status::time_limit, x, g.ytrial);
      }
      if (newton_total >= st.max_total_newton_iter) {
        return finish(Status::max_iter, x, g.ytrial);
      }

      for (std::size_t i = 0; i < m; ++i) shifted[i] = g.ax[i] + y[i] / sigma_y[i];
      active = detect_active_set(shifted, sp.l, sp.u, &active);
      sys.refresh(active, sigma_y, sxi);
      Vector d = sys.direction(g.grad);
      if (norm_inf(d) == 0.0) break;
      if (dot(g.grad, d) >= 0.0) {
        sys.refresh(active, sigma_y, sxi, true);
        d = sys.direction(g.grad);
        if (dot(g.grad, d) >= 0.0) {
          result.info.message = "Newton direction is not a descent direction";
          return finish(Status::stalled, x, g.ytrial);
        }
      }
      const PwaDerivative pwa = build_derivative(sp, x, xhat, d, y, sigma_y, sxi);
      const double tau = exact_linesearch(pwa);
      if (std::abs(tau) < kTinyStep) {
        if (refactored_for_tiny_step) {
          result.info.message = "step size vanished after refactorization";
          return finish(Status::stalled, x, g.ytrial);
        }
        refactored_for_tiny_step = true;
        sys.invalidate();
        continue;
      }
      refactored_for_tiny_step = false;
      for (std::size_t j = 0; j < n; ++j) {
        dx[j] = tau * d[j];
        x[j] += dx[j];
      }
      have_dx = true;
      ++newton_total;
    }

    // outer update
    const bool primal_criterion = primal_converged(norms, eps_a_k, eps_r_k);
    bool xhat_updated = false;
    if (!st.nonconvex) {
      xhat = x;
      xhat_updated = true;
    } else if (primal_criterion) {
      xhat = x;
      xhat_updated = true;
      eps_a_k = std::max(st.rho * eps_a_k, st.eps_abs);
      eps_r_k = std::max(st.rho * eps_r_k, st.eps_rel);
    }
    y = g.ytrial;
    Vector residual(m);
    for (std::size_t i = 0; i < m; ++i) residual[i] = g.ax[i] - g.z[i];
    update_sigma(sigma_y, residual, residual_prev, st.theta, st.delta, st.sigma_max);
    residual_prev = std::move(residual);
    delta_a = std::max(st.rho * delta_a, st.eps_abs);
    delta_r = std::max(st.rho * delta_r, st.eps_rel);

    if (!st.nonconvex) {
      if (st.proximal_stall_iters > 0 && !prox_lowered) {
        prox_stall = primal_converged(norms, st.eps_abs, st.eps_rel) ? prox_stall + 1 : 0;
        if (prox_stall >= st.proximal_stall_iters) {
          std::fill(sxi.begin(), sxi.end(), kLoweredProximal);
          prox_lowered = true;
        }
      }
      if (st.gamma_update) {
        for (double& v : sxi) v = std::max(v / st.gamma_upd, 1.0 / st.gamma_max);
      }
    }

    if (observer_) {
      OuterTrace tr;
      tr.k = outer;
      tr.inner_iterations = nu;
      tr.xhat_updated = xhat_updated;
      tr.primal_criterion = primal_criterion;
      tr.eps_abs_k = eps_a_k;
      tr.eps_rel_k = eps_r_k;
      tr.delta_abs_k = delta_a;
      tr.delta_rel_k = delta_r;
      tr.sigma_y = sigma_y;
      tr.sigma_x_inv = sxi;
      tr.xhat = xhat;
      observer_(tr);
    }
  }
  return finish(Status::max_iter, x, y);
}

SolveResult solve(const QpProblem& problem, const Settings& settings,
                  std::span<const double> x0, std::span<const double> y0) {
  Solver solver(problem, settings);
  return solver.solve(x0, y0);
}

SubproblemResult minimize_subproblem(const QpProblem& p, std::span<const double> xhat,
                                     std::span<const double> y,
                                     std::span<const double> sigma_y,
                                     std::span<const double> sigma_x_inv,
                                     std::span<const double> x_start, double tol,
                                     int max_iter, LinsysMode mode) {
  p.validate();
  const auto choice = select_linsys(p.Q, p.A, mode);
  NewtonSystem sys(p, choice.kind, 160, 0.1);
  SubproblemResult res;
  res.x.assign(x_start.begin(), x_start.end());
  ActiveSet active;
  active.flags.assign(static_cast<std::size_t>(p.m()), 0);
  for (res.iterations = 0;; ++res.iterations) {
    const auto g = subproblem_gradient(p, res.x, xhat, y, sigma_y, sigma_x_inv);
    res.grad_norm = norm_inf(g.grad);
    if (res.grad_norm <= tol || res.iterations >= max_iter) break;
    Vector shifted = g.ax;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += y[i] / sigma_y[i];
    active = detect_active_set(shifted, p.l, p.u, &active);
    sys.refresh(active, sigma_y, sigma_x_inv);
    const Vector d = sys.direction(g.grad);
    if (norm_inf(d) == 0.0) break;
    const double tau =
        exact_linesearch(build_derivative(p, res.x, xhat, d, y, sigma_y, sigma_x_inv));
    for (std::size_t j = 0; j < d.size(); ++j) res.x[j] += tau * d[j];
  }
  return res;
}

}  // namespace qpalm
