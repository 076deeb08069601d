#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "oracles.hpp"
#include "qpalm/matrix_market.hpp"
#include "qpalm/sparse_matrix.hpp"

using namespace qpalm;

TEST_CASE("from_triplets sums duplicates and sorts rows") {
  const std::vector<Triplet> t = {{2, 0, 1.0}, {0, 0, 2.0}, {2, 0, 3.0}, {1, 1, -1.0}};
  const auto m = SparseMatrix::from_triplets(3, 2, t);
  CHECK(m.nnz() == 3);
  CHECK(m.colptr()[0] == 0);
  CHECK(m.colptr()[2] == 3);
  CHECK(m.coeff(2, 0) == 4.0);
  CHECK(m.coeff(0, 0) == 2.0);
  CHECK(m.coeff(1, 1) == -1.0);
  CHECK(m.coeff(0, 1) == 0.0);
  CHECK(m.col_rows(0)[0] == 0);
  CHECK(m.col_rows(0)[1] == 2);
}

TEST_CASE("symmetric storage mirrors lower entries into the upper triangle") {
  const std::vector<Triplet> t = {{1, 0, 5.0}, {0, 0, 1.0}, {1, 1, 2.0}};
  const auto m = SparseMatrix::from_triplets(2, 2, t, Symmetry::upper);
  CHECK(m.is_symmetric());
  CHECK(m.coeff(0, 1) == 5.0);
  CHECK(m.coeff(1, 0) == 5.0);
  const Vector y = m.multiply(Vector{1.0, 1.0});
  CHECK(y[0] == 6.0);
  CHECK(y[1] == 7.0);
  CHECK(m.full_nnz() == 4);
  CHECK(m.norm_inf() == 7.0);
}

TEST_CASE("constructor rejects broken CSC arrays") {
  CHECK_THROWS_AS(SparseMatrix(2, 1, {0, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix(2, 1, {0, 1}, {2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 1}, {1}, {1.0}, Symmetry::upper),
                  std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix(1, 1, {0, 1}, {0}, {}), std::invalid_argument);
}

TEST_CASE("products and transpose agree with dense arithmetic") {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Triplet> t;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i = 0; i < 7; ++i) {
      for (Index j = 0; j < 5; ++j) {
        if (unit(rng) < 0.4) t.push_back({i, j, unit(rng) - 0.5});
      }
    }
    const auto a = SparseMatrix::from_triplets(7, 5, t);
    const auto da = oracle::dense(a);
    const Vector x = oracle::random_vector(5, rng);
    const Vector w = oracle::random_vector(7, rng);
    const Eigen::VectorXd ax = da * oracle::to_eigen(x);
    const Eigen::VectorXd atw = da.transpose() * oracle::to_eigen(w);
    CHECK(oracle::rel_diff(a.multiply(x), oracle::from_eigen(ax)) < 1e-14);
    CHECK(oracle::rel_diff(a.multiply_transpose(w), oracle::from_eigen(atw)) < 1e-14);
    CHECK((oracle::dense(a.transpose()) - da.transpose()).norm() == 0.0);
    const auto sym = oracle::random_symmetric(6, 0.5, rng);
    CHECK((oracle::dense(sym.expanded()) - oracle::dense(sym)).norm() == 0.0);
  }
}

TEST_CASE("row and column norms") {
  const std::vector<double> d = {1, -4, 0, 0, 2, 0};
  const auto a = SparseMatrix::from_dense(2, 3, d);
  const Vector r = a.row_inf_norms();
  const Vector c = a.col_inf_norms();
  CHECK(r == Vector{4.0, 2.0});
  CHECK(c == Vector{1.0, 4.0, 0.0});
  auto s = a;
  s.scale(Vector{2.0, 1.0}, Vector{1.0, 0.5, 1.0});
  CHECK(s.coeff(0, 1) == -4.0);
  CHECK(s.coeff(1, 1) == 1.0);
}

TEST_CASE("matrix market round trip") {
  oracle::Rng rng(3);
  const auto sym = oracle::random_symmetric(8, 0.3, rng);
  std::stringstream ss;
  write_matrix_market(ss, sym);
  const auto back = read_matrix_market(ss);
  CHECK(back.is_symmetric());
  CHECK((oracle::dense(back) - oracle::dense(sym)).norm() == 0.0);

  const std::vector<double> d = {1.5, 0, 0, -2, 3, 0};
  const auto gen = SparseMatrix::from_dense(3, 2, d);
  std::stringstream gs;
  write_matrix_market(gs, gen);
  const auto gback = read_matrix_market(gs);
  CHECK_FALSE(gback.is_symmetric());
  CHECK((oracle::dense(gback) - oracle::dense(gen)).norm() == 0.0);
}

TEST_CASE("matrix market rejects unsupported headers") {
  std::istringstream bad("%%MatrixMarket matrix array real general\n1 1\n1\n");
  CHECK_THROWS(read_matrix_market(bad));
  std::istringstream cplx("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
  CHECK_THROWS(read_matrix_market(cplx));
}
