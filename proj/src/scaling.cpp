#include "qpalm/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpalm {

namespace {

double sqrt_norm_or_one(double v) { return v > 0.0 ? std::sqrt(v) : 1.0; }

Vector reciprocal(std::span<const double> v) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = 1.0 / v[i];
  return r;
}

SparseMatrix scaled_copy(const SparseMatrix& m, std::span<const double> left,
                         std::span<const double> right) {
  SparseMatrix out = m;
  out.scale(left, right);
  return out;
}

}  // namespace

ScalingData ScalingData::identity(Index n, Index m) {
  ScalingData s;
  s.D.assign(static_cast<std::size_t>(n), 1.0);
  s.E.assign(static_cast<std::size_t>(m), 1.0);
  s.c = 1.0;
  s.refresh_inverses();
  return s;
}

void ScalingData::refresh_inverses() {
  Dinv = reciprocal(D);
  Einv = reciprocal(E);
  cinv = 1.0 / c;
}

RuizResult ruiz_equilibrate(const SparseMatrix& A, int iters) {
  if (iters < 0) throw std::invalid_argument("ruiz_equilibrate: iters must be >= 0");
  RuizResult r;
  r.D.assign(static_cast<std::size_t>(A.cols()), 1.0);
  r.E.assign(static_cast<std::size_t>(A.rows()), 1.0);
  r.A_scaled = A;
  for (int k = 0; k < iters; ++k) {
    const Vector row_norms = r.A_scaled.row_inf_norms();
    const Vector col_norms = r.A_scaled.col_inf_norms();
    for (std::size_t i = 0; i < r.E.size(); ++i) r.E[i] /= sqrt_norm_or_one(row_norms[i]);
    for (std::size_t j = 0; j < r.D.size(); ++j) r.D[j] /= sqrt_norm_or_one(col_norms[j]);
    r.A_scaled = scaled_copy(A, r.E, r.D);
  }
  return r;
}

double objective_scaling(const QpProblem& p, std::span<const double> D,
                         std::span<const double> x0) {
  Vector g = p.q;
  if (!x0.empty()) p.Q.multiply(x0, g, true);
  double nrm = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) nrm = std::max(nrm, std::abs(D[j] * g[j]));
  return 1.0 / std::max(1.0, nrm);
}

QpProblem apply_scaling(const QpProblem& p, const ScalingData& s) {
  QpProblem out;
  Vector cd(s.D.size());
  for (std::size_t j = 0; j < cd.size(); ++j) cd[j] = s.c * s.D[j];
  out.Q = scaled_copy(p.Q, s.D, cd);
  out.q.resize(p.q.size());
  for (std::size_t j = 0; j < p.q.size(); ++j) out.q[j] = s.c * s.D[j] * p.q[j];
  out.A = scaled_copy(p.A, s.E, s.D);
  out.l.resize(p.l.size());
  out.u.resize(p.u.size());
  for (std::size_t i = 0; i < p.l.size(); ++i) {
    out.l[i] = s.E[i] * p.l[i];  // infinite bounds stay infinite (E > 0)
    out.u[i] = s.E[i] * p.u[i];
  }
  return out;
}

ScaledProblem scale_problem(const QpProblem& p, std::span<const double> x0,
                            int iters) {
  auto ruiz = ruiz_equilibrate(p.A, iters);
  ScalingData s;
  s.D = std::move(ruiz.D);
  s.E = std::move(ruiz.E);
  s.c = objective_scaling(p, s.D, x0);
  s.refresh_inverses();
  ScaledProblem out;
  out.problem = apply_scaling(p, s);
  out.problem.A = std::move(ruiz.A_scaled);
  out.scaling = std::move(s);
  return out;
}

QpProblem unscale_problem(const QpProblem& scaled, const ScalingData& s) {
  ScalingData inv;
  inv.D = s.Dinv;
  inv.E = s.Einv;
  inv.c = s.cinv;
  inv.refresh_inverses();
  return apply_scaling(scaled, inv);
}

std::pair<Vector, Vector> unscale_solution(std::span<const double> xbar,
                                           std::span<const double> ybar,
                                           const ScalingData& s) {
  if (xbar.size() != s.D.size() || ybar.size() != s.E.size()) {
    throw std::invalid_argument("unscale_solution: dimension mismatch");
  }
  Vector x(xbar.size());
  Vector y(ybar.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = s.D[j] * xbar[j];
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s.cinv * s.E[i] * ybar[i];
  return {std::move(x), std::move(y)};
}

}  // namespace qpalm
