#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "qpalm/ldl.hpp"

using namespace qpalm;

namespace {

double tol_recon(const SparseMatrix& k) { return 1e-9 * (1.0 + k.norm_inf()); }

// Solves K x = b with both factor objects and compares.
double solve_agreement(const LdlFactors& a, const LdlFactors& b, oracle::Rng& rng) {
  const Vector rhs = oracle::random_vector(a.size(), rng);
  return oracle::rel_diff(a.solve(rhs), b.solve(rhs));
}

Permutation random_perm(Index n, oracle::Rng& rng) {
  Permutation p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

SparseVector dense_to_factor(const LdlFactors& f, const Eigen::VectorXd& w) {
  return f.to_factor_order(to_sparse(oracle::from_eigen(w)));
}

}  // namespace

TEST_CASE("identity factors") {
  const auto f = LdlFactors::factorize(SparseMatrix::identity(3), identity_permutation(3));
  CHECK(f.lower_nnz() == 0);
  for (double d : f.diagonal()) CHECK(d == 1.0);
  CHECK(f.solve(Vector{1, 2, 3}) == Vector{1, 2, 3});
}

TEST_CASE("2x2 SPD example") {
  const std::vector<double> k = {4, 2, 2, 3};
  const auto K = SparseMatrix::from_dense(2, 2, k, Symmetry::upper);
  const auto f = LdlFactors::factorize(K, identity_permutation(2));
  CHECK(f.diagonal()[0] == doctest::Approx(4.0));
  CHECK(f.diagonal()[1] == doctest::Approx(2.0));
  CHECK(f.lower().coeff(1, 0) == doctest::Approx(0.5));
  const Vector x = f.solve(Vector{8, 7});
  CHECK(x[0] == doctest::Approx(1.25));
  CHECK(x[1] == doctest::Approx(1.5));
}

TEST_CASE("2x2 quasidefinite example") {
  const std::vector<double> k = {1, 1, 1, -1};
  const auto K = SparseMatrix::from_dense(2, 2, k, Symmetry::upper);
  const auto f = LdlFactors::factorize(K, identity_permutation(2));
  CHECK(f.diagonal()[0] == doctest::Approx(1.0));
  CHECK(f.diagonal()[1] == doctest::Approx(-2.0));
  CHECK(f.lower().coeff(1, 0) == doctest::Approx(1.0));
  const Vector x = f.solve(Vector{0, 2});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(-1.0));
}

TEST_CASE("zero pivots and bad dimensions are reported") {
  const std::vector<double> k = {1, 1, 1, 1};
  const auto K = SparseMatrix::from_dense(2, 2, k, Symmetry::upper);
  CHECK_THROWS_AS(LdlFactors::factorize(K, identity_permutation(2)), FactorizationError);
  const auto f = LdlFactors::factorize(SparseMatrix::identity(3), identity_permutation(3));
  CHECK_THROWS_AS(f.solve(Vector{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(LdlFactors::factorize(SparseMatrix::zero(2, 3), identity_permutation(2)),
                  std::invalid_argument);
}

TEST_CASE("rank-1 update examples") {
  auto f = LdlFactors::factorize(SparseMatrix::identity(2), identity_permutation(2));
  f.rank1_update(SparseVector{}, 1);
  CHECK(f.diagonal()[0] == 1.0);
  f.rank1_update(SparseVector{{0}, {1.0}}, 1);
  CHECK(f.diagonal()[0] == doctest::Approx(2.0));
  CHECK(f.diagonal()[1] == doctest::Approx(1.0));
}

TEST_CASE("rank-1 updates and downdates of random SPD matrices") {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto K = oracle::random_spd(50, 0.1, rng);
    const Eigen::MatrixXd dk = oracle::dense(K);
    for (int sign : {1, -1}) {
      Eigen::VectorXd w = oracle::to_eigen(oracle::random_vector(50, rng));
      if (sign < 0) {
        // Keep K - ww' positive definite: w'K^{-1}w = 1/2.
        w *= std::sqrt(0.5 / w.dot(dk.ldlt().solve(w)));
      }
      auto f = LdlFactors::factorize(K, minimum_degree_ordering(K));
      f.rank1_update(dense_to_factor(f, w), sign);
      const Eigen::MatrixXd target = dk + sign * w * w.transpose();
      const auto Kt = oracle::sparse_upper(target);
      const auto fresh = LdlFactors::factorize(Kt, f.perm());
      CHECK(oracle::reconstruction_error(f, Kt) <= tol_recon(Kt));
      CHECK(solve_agreement(f, fresh, rng) <= 1e-9);
    }
  }
}

TEST_CASE("row addition example") {
  const std::vector<double> start = {2, 0, 0, 0, -1, 0, 0, 0, 3};
  auto f = LdlFactors::factorize(SparseMatrix::from_dense(3, 3, start, Symmetry::upper),
                                 identity_permutation(3));
  f.row_add(1, SparseVector{{0, 2}, {1.0, 0.0}}, -1.0);
  const std::vector<double> target = {2, 1, 0, 1, -1, 0, 0, 0, 3};
  const auto Kt = SparseMatrix::from_dense(3, 3, target, Symmetry::upper);
  const auto fresh = LdlFactors::factorize(Kt, identity_permutation(3));
  for (int i = 0; i < 3; ++i) CHECK(f.diagonal()[i] == doctest::Approx(fresh.diagonal()[i]));
  CHECK(oracle::reconstruction_error(f, Kt) <= tol_recon(Kt));

  SUBCASE("deleting the row restores the placeholder") {
    f.row_delete(1, -1.0);
    const auto K0 = SparseMatrix::from_dense(3, 3, start, Symmetry::upper);
    const auto f0 = LdlFactors::factorize(K0, identity_permutation(3));
    oracle::Rng rng(1);
    CHECK(solve_agreement(f, f0, rng) <= 1e-8);
    CHECK(oracle::reconstruction_error(f, K0) <= tol_recon(K0));
  }
}

TEST_CASE("adding the placeholder column itself leaves the factors unchanged") {
  const std::vector<double> start = {2, 0, 0, 0, -1, 0, 0, 0, 3};
  auto f = LdlFactors::factorize(SparseMatrix::from_dense(3, 3, start, Symmetry::upper),
                                 identity_permutation(3));
  const Vector d_before(f.diagonal().begin(), f.diagonal().end());
  f.row_add(1, SparseVector{}, -1.0);
  CHECK(Vector(f.diagonal().begin(), f.diagonal().end()) == d_before);
  CHECK(f.lower_nnz() == 0);
  f.row_delete(1, -1.0);
  CHECK(Vector(f.diagonal().begin(), f.diagonal().end()) == d_before);
  f.row_delete(2, 5.0);
  CHECK(f.diagonal()[2] == 5.0);
}

TEST_CASE("row modifications reject zero diagonals") {
  auto f = LdlFactors::factorize(SparseMatrix::identity(3), identity_permutation(3));
  CHECK_THROWS_AS(f.row_delete(1, 0.0), FactorizationError);
  CHECK_THROWS_AS(f.row_delete(7, 1.0), std::invalid_argument);
}

TEST_CASE("KKT-shaped matrices: constraint rows added one at a time") {
  oracle::Rng rng(99);
  std::uniform_int_distribution<Index> dim(5, 50);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = dim(rng);
    const Index m = dim(rng);
    // Constraint block diagonal, as in the Newton KKT matrix.
    Eigen::MatrixXd target = oracle::dense(oracle::random_quasidefinite(n, m, 0.15, rng));
    const Eigen::VectorXd nd = target.bottomRightCorner(m, m).diagonal();
    target.bottomRightCorner(m, m) = nd.asDiagonal();
    const auto full = oracle::sparse_upper(target);
    Eigen::MatrixXd cur = target;
    // Start with all constraint rows decoupled.
    for (Index i = n; i < n + m; ++i) {
      for (Index j = 0; j < n + m; ++j) {
        if (j != i) cur(i, j) = cur(j, i) = 0.0;
      }
    }
    auto f = LdlFactors::factorize(full, minimum_degree_ordering(full));
    {
      const auto K0 = oracle::sparse_upper(cur);
      f = LdlFactors::factorize(K0, f.perm());
    }
    for (Index i = n; i < n + m; ++i) {
      Eigen::VectorXd col = target.col(i);
      col[i] = 0.0;
      f.row_add(f.pinv()[i], dense_to_factor(f, col), target(i, i));
      cur.col(i) = target.col(i);
      cur.row(i) = target.row(i);
      const auto Kc = oracle::sparse_upper(cur);
      CHECK(oracle::reconstruction_error(f, Kc) <= tol_recon(Kc));
    }
    const auto fresh = LdlFactors::factorize(full, f.perm());
    CHECK(solve_agreement(f, fresh, rng) <= 1e-8);
  }
}

TEST_CASE("interleaved updates on 80x80 quasidefinite matrices") {
  oracle::Rng rng(4242);
  std::uniform_int_distribution<int> op(0, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n1 = 50;
    const Index n2 = 30;
    Eigen::MatrixXd orig = oracle::dense(oracle::random_quasidefinite(n1, n2, 0.08, rng));
    const Eigen::VectorXd nd = orig.bottomRightCorner(n2, n2).diagonal();
    orig.bottomRightCorner(n2, n2) = nd.asDiagonal();
    const auto K = oracle::sparse_upper(orig);
    Eigen::MatrixXd cur = orig;
    std::vector<bool> coupled(n2, true);
    auto f = LdlFactors::factorize(K, minimum_degree_ordering(K));
    std::uniform_int_distribution<Index> pick(0, n2 - 1);
    for (int step = 0; step < 40; ++step) {
      const int kind = op(rng);
      const Index i = n1 + pick(rng);
      if (kind == 0 && coupled[i - n1]) {
        const double eps = -1.0;
        f.row_delete(f.pinv()[i], eps);
        cur.row(i).setZero();
        cur.col(i).setZero();
        cur(i, i) = eps;
        coupled[i - n1] = false;
      } else if (kind == 1 && !coupled[i - n1]) {
        Eigen::VectorXd col = orig.col(i);
        col[i] = 0.0;
        f.row_add(f.pinv()[i], dense_to_factor(f, col), orig(i, i));
        cur.col(i) = orig.col(i);
        cur.row(i) = orig.row(i);
        coupled[i - n1] = true;
      } else {
        // Positive update on the SPD block keeps quasidefiniteness.
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n1 + n2);
        w.head(n1) = oracle::to_eigen(oracle::random_vector(n1, rng, 0.3));
        f.rank1_update(dense_to_factor(f, w), 1);
        cur += w * w.transpose();
      }
    }
    const auto Kc = oracle::sparse_upper(cur);
    CHECK(oracle::reconstruction_error(f, Kc) <= tol_recon(Kc));
    const auto fresh = LdlFactors::factorize(Kc, f.perm());
    CHECK(solve_agreement(f, fresh, rng) <= 1e-8);
  }
}

TEST_CASE("quasidefinite matrices factor under any permutation") {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto K = oracle::random_quasidefinite(12, 9, 0.3, rng);
    const auto f = LdlFactors::factorize(K, random_perm(21, rng));
    CHECK(oracle::reconstruction_error(f, K) <= tol_recon(K));
    int negative = 0;
    for (double d : f.diagonal()) negative += d < 0.0 ? 1 : 0;
    CHECK(negative == 9);
    const Vector b = oracle::random_vector(21, rng);
    const Vector x = f.solve(b);
    Vector r = K.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    CHECK(oracle::inf_norm(r) <= 1e-10 * K.norm_inf() * oracle::inf_norm(x));
  }
}

TEST_CASE("factor columns keep strictly increasing rows") {
  oracle::Rng rng(13);
  const auto K = oracle::random_quasidefinite(20, 10, 0.2, rng);
  auto f = LdlFactors::factorize(K, minimum_degree_ordering(K));
  f.row_delete(3, -2.0);
  const auto L = f.lower();
  for (Index j = 0; j < L.cols(); ++j) {
    const auto rows = L.col_rows(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(rows[k] > j);
      if (k > 0) CHECK(rows[k] > rows[k - 1]);
    }
  }
  for (double d : f.diagonal()) CHECK(d != 0.0);
}
