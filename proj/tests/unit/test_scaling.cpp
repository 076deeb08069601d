#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "qpalm/generators.hpp"
#include "qpalm/scaling.hpp"

using namespace qpalm;

namespace {

double equilibration_gap(const SparseMatrix& a) {
  double gap = 0.0;
  for (double v : a.row_inf_norms()) gap = std::max(gap, std::abs(v - 1.0));
  for (double v : a.col_inf_norms()) gap = std::max(gap, std::abs(v - 1.0));
  return gap;
}

SparseMatrix random_dense(Index m, Index n, oracle::Rng& rng) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> d(static_cast<std::size_t>(m * n));
  for (double& v : d) v = std::exp(normal(rng));
  return SparseMatrix::from_dense(m, n, d);
}

}  // namespace

TEST_CASE("already equilibrated matrix is untouched") {
  const std::vector<double> d = {1, -1, 1, 1, 1, -1};
  const auto a = SparseMatrix::from_dense(2, 3, d);
  const auto r = ruiz_equilibrate(a, 10);
  for (double v : r.D) CHECK(v == 1.0);
  for (double v : r.E) CHECK(v == 1.0);
  CHECK((oracle::dense(r.A_scaled) - oracle::dense(a)).norm() == 0.0);
}

TEST_CASE("1x1 hand trace") {
  const std::vector<double> d = {4};
  const auto r = ruiz_equilibrate(SparseMatrix::from_dense(1, 1, d), 1);
  CHECK(r.D[0] == 0.5);
  CHECK(r.E[0] == 0.5);
  CHECK(r.A_scaled.coeff(0, 0) == 1.0);
}

TEST_CASE("random 50x30 converges to unit norms") {
  oracle::Rng rng(5);
  const auto a = random_dense(50, 30, rng);
  const auto r = ruiz_equilibrate(a, 100);
  CHECK(equilibration_gap(r.A_scaled) <= 0.01);
  for (double v : r.D) CHECK(v > 0.0);
  for (double v : r.E) CHECK(v > 0.0);
  auto recomputed = a;
  recomputed.scale(r.E, r.D);
  CHECK((oracle::dense(recomputed) - oracle::dense(r.A_scaled)).norm() == 0.0);
}

TEST_CASE("equilibration gap does not grow over ten more sweeps") {
  oracle::Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_dense(20, 15, rng);
    for (int k = 0; k < 30; k += 5) {
      const double before = equilibration_gap(ruiz_equilibrate(a, k).A_scaled);
      const double after = equilibration_gap(ruiz_equilibrate(a, k + 10).A_scaled);
      CHECK(after <= before + 1e-12);
    }
  }
}

TEST_CASE("zero rows and columns keep unit scaling") {
  const std::vector<double> d = {0, 0, 0, 0, 9, 0};
  const auto r = ruiz_equilibrate(SparseMatrix::from_dense(2, 3, d), 5);
  CHECK(r.E[0] == 1.0);
  CHECK(r.D[0] == 1.0);
  CHECK(r.D[2] == 1.0);
  CHECK(r.A_scaled.coeff(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("scale_problem examples") {
  SUBCASE("no sweeps and a small gradient leave the problem unchanged") {
    const auto p = gen_random_qp(4, 3, 1.0, true, 1);
    auto small = p;
    for (double& v : small.q) v = 0.0;
    const auto s = scale_problem(small, {}, 0);
    CHECK(s.scaling.c == 1.0);
    for (double v : s.scaling.D) CHECK(v == 1.0);
    CHECK((oracle::dense(s.problem.Q) - oracle::dense(small.Q)).norm() == 0.0);
    CHECK((oracle::dense(s.problem.A) - oracle::dense(small.A)).norm() == 0.0);
  }
  SUBCASE("objective constant from the gradient at x0") {
    QpProblem p;
    p.Q = SparseMatrix::zero(2, 2, Symmetry::upper);
    p.q = {10.0, 0.0};
    p.A = SparseMatrix::identity(2);
    p.l = {-1.0, -1.0};
    p.u = {1.0, 1.0};
    const auto s = scale_problem(p, Vector{0.0, 0.0}, 0);
    CHECK(s.scaling.c == doctest::Approx(0.1));
    CHECK(s.problem.q[0] == doctest::Approx(1.0));
    CHECK(s.problem.q[1] == 0.0);
  }
}

TEST_CASE("scale and unscale round trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomQpOptions o;
    o.n = 12;
    o.m = 9;
    o.seed = seed;
    o.infinite_bound_fraction = 0.3;
    const auto p = gen_random_qp(o);
    oracle::Rng rng(seed);
    const Vector x0 = oracle::random_vector(12, rng);
    const auto s = scale_problem(p, x0, 10);
    const auto back = unscale_problem(s.problem, s.scaling);
    const auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
      return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
    };
    CHECK(rel(oracle::dense(back.Q), oracle::dense(p.Q)) <= 1e-14);
    CHECK(rel(oracle::dense(back.A), oracle::dense(p.A)) <= 1e-14);
    CHECK(oracle::rel_diff(back.q, p.q) <= 1e-14);
    for (Index i = 0; i < p.m(); ++i) {
      CHECK(std::isinf(p.l[i]) == std::isinf(s.problem.l[i]));
      CHECK(std::isinf(p.u[i]) == std::isinf(s.problem.u[i]));
      if (std::isinf(p.l[i])) CHECK(s.problem.l[i] < 0.0);
      if (std::isfinite(p.l[i])) CHECK(back.l[i] == doctest::Approx(p.l[i]).epsilon(1e-14));
    }
    CHECK(s.scaling.c == doctest::Approx(objective_scaling(p, s.scaling.D, x0)));
  }
}

TEST_CASE("unscale_solution") {
  ScalingData s;
  s.D = {2.0};
  s.E = {3.0};
  s.c = 0.5;
  s.refresh_inverses();
  const auto [x, y] = unscale_solution(Vector{1.0}, Vector{1.0}, s);
  CHECK(x[0] == 2.0);
  CHECK(y[0] == 6.0);

  const auto id = ScalingData::identity(2, 1);
  const auto [xi, yi] = unscale_solution(Vector{3.0, 4.0}, Vector{5.0}, id);
  CHECK(xi == Vector{3.0, 4.0});
  CHECK(yi == Vector{5.0});
}

TEST_CASE("unscale of scaled random vectors is the identity") {
  oracle::Rng rng(31);
  ScalingData s;
  s.D = {0.3, 7.0, 1.1};
  s.E = {2.5, 0.01};
  s.c = 0.02;
  s.refresh_inverses();
  const Vector x = oracle::random_vector(3, rng);
  const Vector y = oracle::random_vector(2, rng);
  Vector xbar(3), ybar(2);
  for (int j = 0; j < 3; ++j) xbar[j] = s.Dinv[j] * x[j];
  for (int i = 0; i < 2; ++i) ybar[i] = s.c * s.Einv[i] * y[i];
  const auto [xb, yb] = unscale_solution(xbar, ybar, s);
  CHECK(oracle::rel_diff(xb, x) <= 1e-14);
  CHECK(oracle::rel_diff(yb, y) <= 1e-14);
}
