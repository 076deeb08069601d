#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qpalm/generators.hpp"
#include "qpalm/newton.hpp"

using namespace qpalm;

namespace {

QpProblem one_dim() {
  QpProblem p;
  p.Q = SparseMatrix::from_triplets(1, 1, std::vector<Triplet>{{0, 0, 2.0}}, Symmetry::upper);
  p.q = {0.0};
  p.A = SparseMatrix::identity(1);
  p.l = {1.0};
  p.u = {1.0};
  return p;
}

// Dense generalized Hessian Q + Sigma_x^{-1} + A_J' Sigma_y A_J.
Eigen::MatrixXd dense_hessian(const QpProblem& p, const ActiveSet& act, const Vector& sy,
                              const Vector& sxi) {
  Eigen::MatrixXd h = oracle::dense(p.Q);
  h.diagonal() += oracle::to_eigen(sxi);
  const Eigen::MatrixXd a = oracle::dense(p.A);
  for (Index i : act.members) h += sy[i] * a.row(i).transpose() * a.row(i);
  return h;
}

struct RandomSub {
  QpProblem p;
  Vector x, xhat, y, sy, sxi;
};

RandomSub random_subproblem(Index n, Index m, std::uint64_t seed) {
  RandomSub s;
  RandomQpOptions o;
  o.n = n;
  o.m = m;
  o.density = 0.3;
  o.seed = seed;
  o.infinite_bound_fraction = 0.2;
  o.equality_fraction = 0.2;
  s.p = gen_random_qp(o);
  oracle::Rng rng(seed + 1000);
  std::uniform_real_distribution<double> pen(0.5, 1e3);
  s.x = oracle::random_vector(n, rng, 2.0);
  s.xhat = oracle::random_vector(n, rng);
  s.y = oracle::random_vector(m, rng);
  s.sy.resize(m);
  for (double& v : s.sy) v = pen(rng);
  s.sxi.assign(n, 1e-3);
  return s;
}

}  // namespace

TEST_CASE("active set membership") {
  const Vector l = {-1, -1, -1};
  const Vector u = {1, 1, 1};
  SUBCASE("strictly inside") {
    const auto a = detect_active_set(Vector{0.0, 0.5, -0.9}, l, u);
    CHECK(a.members.empty());
  }
  SUBCASE("outside on both sides") {
    const auto a = detect_active_set(Vector{-2.0, 0.0, 5.0}, l, u);
    CHECK(a.members == std::vector<Index>{0, 2});
    CHECK(a.entered == std::vector<Index>{0, 2});
    CHECK(a.left.empty());
    const auto b = detect_active_set(Vector{0.0, 3.0, 5.0}, l, u, &a);
    CHECK(b.members == std::vector<Index>{1, 2});
    CHECK(b.entered == std::vector<Index>{1});
    CHECK(b.left == std::vector<Index>{0});
  }
  SUBCASE("boundary values are inactive") {
    const auto a = detect_active_set(Vector{-1.0, 1.0, 0.0}, l, u);
    CHECK(a.members.empty());
  }
}

TEST_CASE("subproblem gradient") {
  SUBCASE("stationary interior point") {
    QpProblem p = one_dim();
    p.q = {-2.0};
    p.l = {-10.0};
    p.u = {10.0};
    const auto g = subproblem_gradient(p, Vector{1.0}, Vector{1.0}, Vector{0.0}, Vector{5.0},
                                       Vector{1e-7});
    CHECK(g.grad[0] == 0.0);
  }
  SUBCASE("1-d worked case") {
    const auto g = subproblem_gradient(one_dim(), Vector{0.0}, Vector{0.0}, Vector{0.0},
                                       Vector{10.0}, Vector{1e-7});
    CHECK(g.z[0] == 1.0);
    CHECK(g.ytrial[0] == -10.0);
    CHECK(g.grad[0] == -10.0);
  }
  SUBCASE("finite differences of the subproblem objective") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = random_subproblem(8, 6, seed);
      const auto phi = [&](const Vector& x) {
        double v = s.p.objective(x);
        const Vector ax = s.p.A.multiply(x);
        for (Index i = 0; i < s.p.m(); ++i) {
          const double w = ax[i] + s.y[i] / s.sy[i];
          const double z = std::clamp(w, s.p.l[i], s.p.u[i]);
          v += 0.5 * s.sy[i] * (w - z) * (w - z);
        }
        for (Index j = 0; j < s.p.n(); ++j) {
          v += 0.5 * s.sxi[j] * (x[j] - s.xhat[j]) * (x[j] - s.xhat[j]);
        }
        return v;
      };
      const auto g = subproblem_gradient(s.p, s.x, s.xhat, s.y, s.sy, s.sxi);
      const double h = 1e-6;
      const double scale = 1.0 + oracle::inf_norm(g.grad);
      for (Index j = 0; j < s.p.n(); ++j) {
        Vector xp = s.x;
        Vector xm = s.x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (phi(xp) - phi(xm)) / (2 * h);
        CHECK(std::abs(fd - g.grad[j]) <= 1e-4 * scale);
      }
    }
  }
}

TEST_CASE("linear system selection") {
  SUBCASE("no constraints") {
    const auto c = select_linsys(SparseMatrix::identity(3), SparseMatrix::zero(0, 3));
    CHECK(c.kind == LinsysKind::schur);
  }
  SUBCASE("dense 4x4 constraints, diagonal Q: hand evaluation") {
    std::vector<double> d(16, 1.0);
    const auto a = SparseMatrix::from_dense(4, 4, d);
    const auto c = select_linsys(SparseMatrix::identity(4), a);
    // |K| = 4 + 2*16 + 4 = 40; |H~| = 4 + (16 - 4) + 3*(12 - 16 + 4) = 16.
    CHECK(c.kkt_nnz == 40.0);
    CHECK(c.schur_estimate == 16.0);
    CHECK(c.ratio == doctest::Approx(0.5 * 1600.0 / 256.0));
    CHECK(c.kind == LinsysKind::schur);
  }
  SUBCASE("ratio exactly 2 selects Schur") {
    const std::vector<double> q = {1, 1, 1, 1};
    const std::vector<double> a = {1, 0, 1, 1};
    const auto c = select_linsys(SparseMatrix::from_dense(2, 2, q, Symmetry::upper),
                                 SparseMatrix::from_dense(2, 2, a));
    CHECK(c.ratio == 2.0);
    CHECK(c.kind == LinsysKind::schur);
  }
  SUBCASE("row density drives the choice; overrides are respected") {
    std::vector<Triplet> t;
    for (Index i = 0; i < 30; ++i) t.push_back({i, i % 10, 1.0});
    const auto sparse_a = SparseMatrix::from_triplets(30, 10, t);
    const auto q = SparseMatrix::identity(10);
    CHECK(select_linsys(q, sparse_a).kind == LinsysKind::schur);
    std::vector<double> row(10, 1.0);
    const auto dense_a = SparseMatrix::from_dense(1, 10, row);
    CHECK(select_linsys(q, dense_a).kind == LinsysKind::kkt);
    CHECK(select_linsys(q, sparse_a, LinsysMode::kkt).kind == LinsysKind::kkt);
    CHECK(select_linsys(q, dense_a, LinsysMode::schur).kind == LinsysKind::schur);
  }
}

TEST_CASE("Newton direction on the 1-d case") {
  const auto p = one_dim();
  const Vector sy = {10.0};
  const Vector sxi = {1e-7};
  const auto g = subproblem_gradient(p, Vector{0.0}, Vector{0.0}, Vector{0.0}, sy, sxi);
  const auto act = detect_active_set(p, Vector{0.0}, Vector{0.0}, sy);
  for (auto kind : {LinsysKind::schur, LinsysKind::kkt}) {
    NewtonSystem sys(p, kind, 160, 0.1);
    sys.refresh(act, sy, sxi);
    const Vector d = sys.direction(g.grad);
    CHECK(d[0] == doctest::Approx(10.0 / 12.0000001).epsilon(1e-14));
    const Vector zero = sys.direction(Vector{0.0});
    CHECK(zero[0] == 0.0);
  }
}

TEST_CASE("KKT and Schur directions agree and solve the Newton system") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Rng rng(seed);
    std::uniform_int_distribution<Index> dim(2, 40);
    const Index n = dim(rng);
    const Index m = dim(rng);
    auto s = random_subproblem(n, m, seed);
    const auto g = subproblem_gradient(s.p, s.x, s.xhat, s.y, s.sy, s.sxi);
    const auto act = detect_active_set(s.p, s.x, s.y, s.sy);
    NewtonSystem kkt(s.p, LinsysKind::kkt, 160, 0.1);
    NewtonSystem schur(s.p, LinsysKind::schur, 160, 0.1);
    kkt.refresh(act, s.sy, s.sxi);
    schur.refresh(act, s.sy, s.sxi);
    const Vector dk = kkt.direction(g.grad);
    const Vector ds = schur.direction(g.grad);
    CHECK(oracle::rel_diff(dk, ds) <= 1e-8);
    const Eigen::VectorXd r =
        dense_hessian(s.p, act, s.sy, s.sxi) * oracle::to_eigen(ds) + oracle::to_eigen(g.grad);
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-8 * oracle::inf_norm(g.grad));
    CHECK(dot(g.grad, ds) < 0.0);
    for (Index i = 0; i < m; ++i) {
      if (!act.contains(i)) CHECK(kkt.last_lambda()[i] == 0.0);
    }
  }
}

TEST_CASE("updated systems match always-refactorized ones") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = random_subproblem(25, 30, seed + 50);
    oracle::Rng rng(seed);
    for (auto kind : {LinsysKind::kkt, LinsysKind::schur}) {
      NewtonSystem upd(s.p, kind, 160, 0.5);
      ActiveSet prev;
      prev.flags.assign(30, 0);
      Vector x = s.x;
      Vector sy = s.sy;
      for (int step = 0; step < 12; ++step) {
        x = oracle::random_vector(25, rng, 1.5);
        if (step % 4 == 3) {
          // A handful of penalties grow, as after an outer iteration.
          for (int k = 0; k < 3; ++k) sy[(step * 7 + k * 5) % 30] *= 10.0;
        }
        const auto act = detect_active_set(s.p, x, s.y, sy, &prev);
        upd.refresh(act, sy, s.sxi);
        NewtonSystem fresh(s.p, kind, 160, 0.5);
        fresh.refresh(act, sy, s.sxi);
        const auto g = subproblem_gradient(s.p, x, s.xhat, s.y, sy, s.sxi);
        CHECK(oracle::rel_diff(upd.direction(g.grad), fresh.direction(g.grad)) <= 1e-7);
        prev = act;
      }
      CHECK(upd.counters().update_rounds > 0);
    }
  }
}

TEST_CASE("refresh bookkeeping") {
  auto s = random_subproblem(20, 30, 3);
  NewtonSystem sys(s.p, LinsysKind::kkt, 160, 0.1);
  const auto act = detect_active_set(s.p, s.x, s.y, s.sy);
  CHECK(sys.refresh(act, s.sy, s.sxi));
  const auto before = sys.counters();
  SUBCASE("unchanged active set") {
    CHECK_FALSE(sys.refresh(detect_active_set(s.p, s.x, s.y, s.sy, &act), s.sy, s.sxi));
    CHECK(sys.counters().factorizations == before.factorizations);
    CHECK(sys.counters().row_modifications == before.row_modifications);
  }
  SUBCASE("one constraint enters") {
    Vector shifted = s.p.A.multiply(s.x);
    for (Index i = 0; i < s.p.m(); ++i) shifted[i] += s.y[i] / s.sy[i];
    Index target = -1;
    for (Index i = 0; i < s.p.m() && target < 0; ++i) {
      if (!act.contains(i) && std::isfinite(s.p.u[i])) target = i;
    }
    REQUIRE(target >= 0);
    shifted[target] = s.p.u[target] + 1.0;
    const auto next = detect_active_set(shifted, s.p.l, s.p.u, &act);
    CHECK(next.entered == std::vector<Index>{target});
    CHECK_FALSE(sys.refresh(next, s.sy, s.sxi));
    CHECK(sys.counters().row_modifications == before.row_modifications + 1);
    NewtonSystem fresh(s.p, LinsysKind::kkt, 160, 0.1);
    fresh.refresh(next, s.sy, s.sxi);
    oracle::Rng rng(1);
    const Vector g = oracle::random_vector(20, rng);
    CHECK(oracle::rel_diff(sys.direction(g), fresh.direction(g)) <= 1e-8);
  }
  SUBCASE("a proximal change forces refactorization") {
    Vector sxi = s.sxi;
    sxi[0] *= 2.0;
    CHECK(sys.refresh(act, s.sy, sxi));
    CHECK(sys.counters().factorizations == before.factorizations + 1);
  }
}

TEST_CASE("large active-set changes take the refactorization path") {
  RandomQpOptions o;
  o.n = 50;
  o.m = 400;
  o.density = 0.05;
  o.seed = 9;
  const auto p = gen_random_qp(o);
  const Vector sy(400, 10.0);
  const Vector sxi(50, 1e-7);
  NewtonSystem sys(p, LinsysKind::kkt, 160, 1.0);
  Vector inside(400);
  for (Index i = 0; i < 400; ++i) inside[i] = 0.5 * (p.l[i] + p.u[i]);
  const auto none = detect_active_set(inside, p.l, p.u);
  sys.refresh(none, sy, sxi);
  Vector shifted = inside;
  for (Index i = 0; i < 200; ++i) shifted[i] = p.u[i] + 1.0;
  const auto many = detect_active_set(shifted, p.l, p.u, &none);
  CHECK(many.entered.size() == 200);
  const long f0 = sys.counters().factorizations;
  CHECK(sys.refresh(many, sy, sxi));
  CHECK(sys.counters().factorizations == f0 + 1);
  CHECK(sys.counters().row_modifications == 0);
}
