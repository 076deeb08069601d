#include "qpalm/lobpcg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace qpalm {

namespace {

// Cyclic Jacobi on a symmetric k*k row-major matrix; eigenvectors are the
// columns of v on return.
void jacobi_eig(std::vector<double>& a, std::vector<double>& v, int k) {
  v.assign(static_cast<std::size_t>(k * k), 0.0);
  for (int i = 0; i < k; ++i) v[i * k + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        total += a[i * k + j] * a[i * k + j];
        if (i != j) off += a[i * k + j] * a[i * k + j];
      }
    }
    if (off <= 1e-32 * total || off == 0.0) return;
    for (int p = 0; p < k; ++p) {
      for (int q = p + 1; q < k; ++q) {
        const double apq = a[p * k + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < k; ++r) {
          const double arp = a[r * k + p];
          const double arq = a[r * k + q];
          a[r * k + p] = c * arp - s * arq;
          a[r * k + q] = s * arp + c * arq;
        }
        for (int r = 0; r < k; ++r) {
          const double apr = a[p * k + r];
          const double aqr = a[q * k + r];
          a[p * k + r] = c * apr - s * aqr;
          a[q * k + r] = s * apr + c * aqr;
        }
        for (int r = 0; r < k; ++r) {
          const double vrp = v[r * k + p];
          const double vrq = v[r * k + q];
          v[r * k + p] = c * vrp - s * vrq;
          v[r * k + q] = s * vrp + c * vrq;
        }
      }
    }
  }
}

// Modified Gram-Schmidt (two passes) of v against orthonormal columns.
// Returns false when v is numerically inside their span.
bool orthonormalize(Vector& v, const std::vector<const Vector*>& basis) {
  const double before = norm2(v);
  if (before == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector* b : basis) {
      const double proj = dot(*b, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * (*b)[i];
    }
  }
  const double after = norm2(v);
  // a column this close to the span would push cond(S^T S) past 1e12
  if (!(after > 1e-6 * before)) return false;
  for (double& e : v) e /= after;
  return true;
}

}  // namespace

SmallEigResult small_generalized_symmetric_eig(std::span<const double> a,
                                               std::span<const double> b,
                                               int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("small eig: k must be 1, 2 or 3");
  const auto kk = static_cast<std::size_t>(k * k);
  if (a.size() != kk || b.size() != kk) {
    throw std::invalid_argument("small eig: dimension mismatch");
  }
  // B = L L^T
  std::vector<double> l(kk, 0.0);
  double bmax = 0.0;
  for (int i = 0; i < k; ++i) bmax = std::max(bmax, std::abs(b[i * k + i]));
  for (int j = 0; j < k; ++j) {
    double s = b[j * k + j];
    for (int p = 0; p < j; ++p) s -= l[j * k + p] * l[j * k + p];
    if (!(s > 1e-14 * bmax)) {
      throw std::runtime_error("small eig: B is numerically singular");
    }
    l[j * k + j] = std::sqrt(s);
    for (int i = j + 1; i < k; ++i) {
      double t = b[i * k + j];
      for (int p = 0; p < j; ++p) t -= l[i * k + p] * l[j * k + p];
      l[i * k + j] = t / l[j * k + j];
    }
  }
  // C = L^{-1} A L^{-T}: first X = L^{-1} A, then C = L^{-1} X^T
  auto lower_solve = [&](std::vector<double>& m) {
    for (int col = 0; col < k; ++col) {
      for (int i = 0; i < k; ++i) {
        double s = m[i * k + col];
        for (int p = 0; p < i; ++p) s -= l[i * k + p] * m[p * k + col];
        m[i * k + col] = s / l[i * k + i];
      }
    }
  };
  std::vector<double> x(a.begin(), a.end());
  lower_solve(x);
  std::vector<double> c(kk);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) c[i * k + j] = x[j * k + i];
  }
  lower_solve(c);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double avg = 0.5 * (c[i * k + j] + c[j * k + i]);
      c[i * k + j] = avg;
      c[j * k + i] = avg;
    }
  }
  std::vector<double> u;
  jacobi_eig(c, u, k);

  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int p, int q) { return c[p * k + p] < c[q * k + q]; });

  SmallEigResult res;
  for (int idx : order) {
    res.values.push_back(c[idx * k + idx]);
    // v = L^{-T} u
    Vector v(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
      double s = u[i * k + idx];
      for (int p = i + 1; p < k; ++p) s -= l[p * k + i] * v[p];
      v[i] = s / l[i * k + i];
    }
    res.vectors.push_back(std::move(v));
  }
  return res;
}

Vector default_eig_start(Index n) {
  Vector x(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    // Knuth multiplicative hash bit as a fixed sign pattern
    const auto h = static_cast<std::uint32_t>(i) * 2654435761u;
    x[i] = 1.0 + ((h >> 16) & 1u ? 0.5 : -0.5);
  }
  const double nrm = norm2(x);
  if (nrm > 0) {
    for (double& e : x) e /= nrm;
  }
  return x;
}

double gershgorin_lower_bound(const SparseMatrix& q) {
  const Index n = q.rows();
  if (n == 0) return 0.0;
  Vector diag(static_cast<std::size_t>(n), 0.0);
  Vector radius(static_cast<std::size_t>(n), 0.0);
  const auto full = q.expanded();
  for (Index j = 0; j < n; ++j) {
    auto rows = full.col_rows(j);
    auto vals = full.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (rows[p] == j) {
        diag[j] += vals[p];
      } else {
        radius[j] += std::abs(vals[p]);
      }
    }
  }
  double lb = INFINITY;
  for (Index i = 0; i < n; ++i) lb = std::min(lb, diag[i] - radius[i]);
  return lb;
}

EigEstimate min_eigenvalue(const SparseMatrix& q, std::span<const double> x0,
                           double eps, int max_iter) {
  if (q.rows() != q.cols()) throw std::invalid_argument("min_eigenvalue: matrix must be square");
  const auto n = static_cast<std::size_t>(q.rows());
  if (x0.size() != n) throw std::invalid_argument("min_eigenvalue: start vector size mismatch");
  EigEstimate est;
  if (n == 0) {
    est.converged = true;
    return est;
  }
  Vector x(x0.begin(), x0.end());
  const double nrm = norm2(x);
  if (nrm == 0.0) throw std::invalid_argument("min_eigenvalue: zero start vector");
  for (double& e : x) e /= nrm;

  Vector qx = q.multiply(x);
  double lambda = dot(x, qx);
  est.rayleigh_history.push_back(lambda);

  Vector w(n), p;
  bool have_p = false;
  for (int iter = 0;; ++iter) {
    for (std::size_t i = 0; i < n; ++i) w[i] = qx[i] - lambda * x[i];
    const double r = norm2(w);
    est.iterations = iter;
    est.residual_norm = r;
    if (r <= eps) {
      est.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    std::vector<const Vector*> basis{&x};
    const bool use_w = orthonormalize(w, basis);
    if (use_w) basis.push_back(&w);
    bool use_p = have_p && orthonormalize(p, basis);
    if (use_p) basis.push_back(&p);
    if (basis.size() == 1) break;  // nothing left to improve with

    std::vector<Vector> qs{qx};
    if (use_w) qs.push_back(q.multiply(w));
    if (use_p) qs.push_back(q.multiply(p));

    SmallEigResult ritz;
    int k = static_cast<int>(basis.size());
    for (;;) {
      std::vector<double> ga(static_cast<std::size_t>(k * k));
      std::vector<double> gb(static_cast<std::size_t>(k * k));
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          ga[i * k + j] = dot(*basis[i], qs[j]);
          gb[i * k + j] = dot(*basis[i], *basis[j]);
        }
      }
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          const double avg = 0.5 * (ga[i * k + j] + ga[j * k + i]);
          ga[i * k + j] = avg;
          ga[j * k + i] = avg;
        }
      }
      try {
        ritz = small_generalized_symmetric_eig(ga, gb, k);
        break;
      } catch (const std::runtime_error&) {
        if (k == 1) throw;
        --k;
        basis.pop_back();
        qs.pop_back();
      }
    }
    const Vector& y = ritz.vectors.front();
    Vector xn(n, 0.0);
    Vector pn(n, 0.0);
    for (int i = 0; i < k; ++i) {
      const Vector& s = *basis[i];
      for (std::size_t t = 0; t < n; ++t) {
        xn[t] += y[i] * s[t];
        if (i > 0) pn[t] += y[i] * s[t];
      }
    }
    const double xn_norm = norm2(xn);
    for (std::size_t t = 0; t < n; ++t) {
      x[t] = xn[t] / xn_norm;
      pn[t] /= xn_norm;
    }
    p = std::move(pn);
    have_p = k > 1;
    qx = q.multiply(x);
    lambda = dot(x, qx);
    est.rayleigh_history.push_back(lambda);
  }
  est.lambda_lb = lambda - est.residual_norm;
  est.eigvec = std::move(x);
  return est;
}

}  // namespace qpalm
