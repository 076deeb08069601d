#include "qpalm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qpalm {

void QpProblem::validate() const {
  const Index nv = Q.rows();
  if (Q.cols() != nv) throw std::invalid_argument("problem: Q must be square");
  if (!Q.is_symmetric()) {
    throw std::invalid_argument("problem: Q must be stored as an upper triangle");
  }
  if (q.size() != static_cast<std::size_t>(nv)) {
    throw std::invalid_argument("problem: q has wrong length");
  }
  if (A.cols() != nv) throw std::invalid_argument("problem: A has wrong column count");
  if (A.is_symmetric()) throw std::invalid_argument("problem: A must use general storage");
  const auto mc = static_cast<std::size_t>(A.rows());
  if (l.size() != mc || u.size() != mc) {
    throw std::invalid_argument("problem: bounds have wrong length");
  }
  for (double v : Q.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("problem: Q has non-finite entries");
  }
  for (double v : A.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("problem: A has non-finite entries");
  }
  for (double v : q) {
    if (!std::isfinite(v)) throw std::invalid_argument("problem: q has non-finite entries");
  }
  for (std::size_t i = 0; i < mc; ++i) {
    if (std::isnan(l[i]) || std::isnan(u[i]) || l[i] > u[i] ||
        l[i] == INFINITY || u[i] == -INFINITY) {
      throw std::invalid_argument("problem: invalid bounds in row " +
                                  std::to_string(i));
    }
  }
}

double QpProblem::objective(std::span<const double> x) const {
  const Vector qx = Q.multiply(x);
  return 0.5 * dot(x, qx) + dot(q, x);
}

void project_box(std::span<const double> v, std::span<const double> l,
                 std::span<const double> u, std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::min(std::max(v[i], l[i]), u[i]);
  }
}

}  // namespace qpalm
