#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "qpalm/generators.hpp"
#include "qpalm/lobpcg.hpp"
#include "qpalm/solver.hpp"

using namespace qpalm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool identical(const QpProblem& a, const QpProblem& b) {
  auto same = [](const SparseMatrix& x, const SparseMatrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::ranges::equal(x.colptr(), y.colptr()) &&
           std::ranges::equal(x.rowidx(), y.rowidx()) &&
           std::ranges::equal(x.values(), y.values());
  };
  return same(a.Q, b.Q) && same(a.A, b.A) && a.q == b.q && a.l == b.l && a.u == b.u;
}

Settings tight() {
  Settings s;
  s.eps_abs = 1e-6;
  s.eps_rel = 1e-6;
  return s;
}

}  // namespace

TEST_CASE("portfolio dimensions and structure") {
  const auto p = gen_portfolio(10, 0);
  CHECK(p.n() == 11);
  CHECK(p.m() == 10 + 1 + 1);
  CHECK_NOTHROW(p.validate());
  // diagonal Q with an identity block for the factor variables
  const auto q = oracle::dense(p.Q);
  CHECK((q - Eigen::MatrixXd(q.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(q(10, 10) == 2.0);
  for (Index i = 0; i < 10; ++i) {
    CHECK(q(i, i) >= 0.0);
    CHECK(q(i, i) <= 2.0 * std::sqrt(1.0));
    CHECK(p.q[i] <= 0.0);
    CHECK(p.l[i] == 0.0);
    CHECK(p.u[i] == kInf);
  }
  CHECK(p.l[10] == 1.0);
  CHECK(p.u[10] == 1.0);
  CHECK(p.l[11] == 0.0);
  CHECK(p.u[11] == 0.0);
  CHECK(gen_portfolio(95, 0).n() == 95 + 10);
  CHECK_THROWS_AS(gen_portfolio(10, 0, 0.0), std::invalid_argument);
}

TEST_CASE("portfolio instances solve to a feasible allocation") {
  for (Index n : {10, 40, 100}) {
    for (double beta : {1e-2, 1.0, 1e2}) {
      const auto p = gen_portfolio(n, static_cast<std::uint64_t>(n), beta);
      // purely absolute tolerance so that feasibility holds to 1e-6 per row
      Settings st = tight();
      st.eps_rel = 0.0;
      const auto r = solve(p, st);
      REQUIRE(r.status == Status::solved);
      double sum = 0.0;
      for (Index i = 0; i < n; ++i) {
        CHECK(r.x[i] >= -1e-6);
        sum += r.x[i];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
      CHECK(oracle::verify_termination(p, r.x, r.y, 1e-6, 0.0).passed());
    }
  }
}

TEST_CASE("mpc dimensions for N = 1, nx = nu = 1") {
  const auto inst = gen_mpc(MpcOptions{.nx = 1, .nu = 1, .horizon = 1, .seed = 3});
  const auto& p = inst.qp;
  CHECK(p.n() == 3);
  CHECK(p.m() == 2 + 3);
  int equalities = 0;
  for (Index i = 0; i < p.m(); ++i) equalities += p.l[i] == p.u[i];
  CHECK(equalities == 2);
  CHECK(p.l[0] == inst.x_init[0]);
  for (Index i = 2; i < 5; ++i) {
    CHECK(p.l[i] == -p.u[i]);
    CHECK(p.u[i] > 0.0);
  }
  const auto a = oracle::dense(p.A);
  // x1 - A x0 - B u0 = 0
  CHECK(a(1, 2) == 1.0);
  CHECK(a(1, 0) == -inst.a[0]);
  CHECK(a(1, 1) == -inst.b[0]);
  CHECK(oracle::dense(p.Q)(1, 1) == doctest::Approx(0.02));
}

TEST_CASE("mpc block counts and solvability") {
  for (Index N : {2, 5, 12}) {
    const auto inst = gen_mpc(MpcOptions{.nx = 4, .nu = 2, .horizon = N, .seed = 7});
    CHECK(inst.qp.n() == (N + 1) * 4 + N * 2);
    CHECK(inst.qp.m() == 4 + N * 4 + inst.qp.n());
    const auto r = solve(inst.qp, tight());
    REQUIRE(r.status == Status::solved);
    // trajectory follows the dynamics
    for (Index k = 0; k < N; ++k) {
      const std::span<const double> z = r.x;
      const auto next = inst.step(z.subspan(inst.state_offset(k), 4),
                                  z.subspan(inst.input_offset(k), 2));
      for (Index i = 0; i < 4; ++i) {
        CHECK(std::abs(next[i] - r.x[inst.state_offset(k + 1) + i]) <= 1e-4);
      }
    }
  }
}

TEST_CASE("shifted warm start moves blocks one stage forward") {
  const auto inst = gen_mpc(MpcOptions{.nx = 2, .nu = 1, .horizon = 3, .seed = 1});
  Vector z(static_cast<std::size_t>(inst.qp.n()));
  std::iota(z.begin(), z.end(), 0.0);
  Vector y(static_cast<std::size_t>(inst.qp.m()));
  std::iota(y.begin(), y.end(), 100.0);
  const auto [zs, ys] = shift_warm_start(inst, z, y);
  // stage k of the shifted vector is stage k + 1 of the original
  CHECK(zs[0] == z[3]);
  CHECK(zs[3] == z[6]);
  // the final state and the last input are repeated
  CHECK(zs[6] == z[9]);
  CHECK(zs[8] == z[8]);
  CHECK(zs[9] == z[9]);
  CHECK(ys[0] == y[2]);
  CHECK(ys.size() == y.size());
  CHECK_THROWS_AS(shift_warm_start(inst, Vector{1.0}, y), std::invalid_argument);
}

TEST_CASE("generators are pure functions of dimensions and seed") {
  CHECK(identical(gen_portfolio(30, 5), gen_portfolio(30, 5)));
  CHECK_FALSE(identical(gen_portfolio(30, 5), gen_portfolio(30, 6)));
  CHECK(identical(gen_mpc(3, 2, 5, 9), gen_mpc(3, 2, 5, 9)));
  CHECK_FALSE(identical(gen_mpc(3, 2, 5, 9), gen_mpc(3, 2, 5, 10)));
  CHECK(identical(gen_random_qp(20, 10, 0.2, false, 4), gen_random_qp(20, 10, 0.2, false, 4)));
}

TEST_CASE("random convex problems are solvable by enumeration") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = gen_random_qp(6, 6, 0.5, true, seed);
    const auto ref = oracle::enumerate_qp(p);
    REQUIRE(ref.has_value());
    CHECK(oracle::min_eigenvalue(p.Q) >= 1e-2 - 1e-12);
  }
}

TEST_CASE("random nonconvex problems carry the prescribed smallest eigenvalue") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RandomQpOptions o;
    o.n = 40;
    o.m = 20;
    o.convex = false;
    o.min_eig = -5.0;
    o.seed = seed;
    const auto p = gen_random_qp(o);
    CHECK(oracle::min_eigenvalue(p.Q) == doctest::Approx(-5.0).epsilon(1e-10));
    const auto est = min_eigenvalue(p.Q, default_eig_start(p.n()));
    REQUIRE(est.converged);
    CHECK(est.lambda_lb >= -5.0 - 1e-4);
    CHECK(est.lambda_lb <= -5.0);
  }
}

TEST_CASE("density one gives a dense pattern") {
  const auto p = gen_random_qp(3, 3, 1.0, true, 0);
  CHECK(p.A.nnz() == 9);
  CHECK(p.Q.nnz() == 6);
  // bounds enclose a feasible point: the solver finds one
  CHECK(solve(p, tight()).status == Status::solved);
}
