#include "qpalm/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qpalm {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

// Row-major dense product c = a * b for square k x k matrices.
Vector square_product(const Vector& a, const Vector& b, Index k) {
  Vector c(a.size(), 0.0);
  for (Index i = 0; i < k; ++i) {
    for (Index l = 0; l < k; ++l) {
      const double ail = a[i * k + l];
      if (ail == 0.0) continue;
      for (Index j = 0; j < k; ++j) c[i * k + j] += ail * b[l * k + j];
    }
  }
  return c;
}

// ||A^64||_F^(1/64), computed by repeated squaring with renormalization.
double spectral_radius_estimate(const Vector& a, Index k) {
  Vector p = a;
  double log_scale = 0.0;
  int power = 1;
  for (int s = 0; s < 6; ++s) {
    double fro = 0.0;
    for (double v : p) fro += v * v;
    fro = std::sqrt(fro);
    if (fro == 0.0) return 0.0;
    for (double& v : p) v /= fro;
    log_scale += std::log(fro) / power;
    p = square_product(p, p, k);
    power *= 2;
  }
  double fro = 0.0;
  for (double v : p) fro += v * v;
  if (fro == 0.0) return 0.0;
  return std::exp(log_scale + 0.5 * std::log(fro) / power);
}

}  // namespace

QpProblem gen_portfolio(Index n, std::uint64_t seed, double beta) {
  if (n < 1) throw std::invalid_argument("gen_portfolio: n must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("gen_portfolio: beta must be positive");
  Rng rng(seed);
  const Index r = (n + 9) / 10;
  const Index nv = n + r;
  const double d_max = std::sqrt(static_cast<double>(r));

  std::vector<Triplet> qt;
  for (Index i = 0; i < n; ++i) qt.push_back({i, i, 2.0 * uniform(rng, 0.0, d_max)});
  for (Index k = 0; k < r; ++k) qt.push_back({n + k, n + k, 2.0});

  QpProblem p;
  p.q.assign(static_cast<std::size_t>(nv), 0.0);
  for (Index i = 0; i < n; ++i) p.q[i] = -uniform(rng, 0.0, 1.0) / beta;

  const Index m = n + 1 + r;
  std::vector<Triplet> at;
  for (Index i = 0; i < n; ++i) at.push_back({i, i, 1.0});
  for (Index i = 0; i < n; ++i) at.push_back({n, i, 1.0});
  for (Index k = 0; k < r; ++k) {
    at.push_back({n + 1 + k, n + k, 1.0});
    for (Index i = 0; i < n; ++i) {
      if (bernoulli(rng, 0.5)) at.push_back({n + 1 + k, i, -normal(rng, 0.0, 1.0)});
    }
  }
  p.Q = SparseMatrix::from_triplets(nv, nv, qt, Symmetry::upper);
  p.A = SparseMatrix::from_triplets(m, nv, at);
  p.l.assign(static_cast<std::size_t>(m), 0.0);
  p.u.assign(static_cast<std::size_t>(m), 0.0);
  for (Index i = 0; i < n; ++i) p.u[i] = INFINITY;
  p.l[n] = p.u[n] = 1.0;
  return p;
}

Vector MpcInstance::step(std::span<const double> x, std::span<const double> u) const {
  Vector next(static_cast<std::size_t>(nx), 0.0);
  for (Index i = 0; i < nx; ++i) {
    double s = 0.0;
    for (Index j = 0; j < nx; ++j) s += a[i * nx + j] * x[j];
    for (Index j = 0; j < nu; ++j) s += b[i * nu + j] * u[j];
    next[i] = s;
  }
  return next;
}

MpcInstance gen_mpc(const MpcOptions& o) {
  if (o.nx < 1 || o.nu < 1 || o.horizon < 1) {
    throw std::invalid_argument("gen_mpc: nx, nu and horizon must be positive");
  }
  Rng rng(o.seed);
  MpcInstance inst;
  const Index nx = inst.nx = o.nx;
  const Index nu = inst.nu = o.nu;
  const Index N = inst.horizon = o.horizon;

  Vector mm(static_cast<std::size_t>(nx * nx), 0.0);
  for (double& v : mm) {
    if (bernoulli(rng, 0.5)) v = normal(rng, 0.0, 5.0);
  }
  Vector qs(static_cast<std::size_t>(nx * nx), 0.0);  // M'M
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j < nx; ++j) {
      double s = 0.0;
      for (Index k = 0; k < nx; ++k) s += mm[k * nx + i] * mm[k * nx + j];
      qs[i * nx + j] = s;
    }
  }
  inst.a.resize(static_cast<std::size_t>(nx * nx));
  for (double& v : inst.a) v = normal(rng, 0.0, 2.0);
  const double rho = spectral_radius_estimate(inst.a, nx);
  if (rho > o.max_spectral_radius) {
    for (double& v : inst.a) v *= o.max_spectral_radius / rho;
  }
  inst.b.resize(static_cast<std::size_t>(nx * nu));
  for (double& v : inst.b) v = normal(rng, 0.0, 1.0);
  inst.x_bound.resize(static_cast<std::size_t>(nx));
  inst.u_bound.resize(static_cast<std::size_t>(nu));
  for (double& v : inst.x_bound) v = std::abs(normal(rng, 10.0, 2.0));
  for (double& v : inst.u_bound) v = std::abs(normal(rng, 10.0, 2.0));
  inst.x_init.resize(static_cast<std::size_t>(nx));
  for (Index i = 0; i < nx; ++i) {
    const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
    inst.x_init[i] = sign * o.init_fraction * inst.x_bound[i];
  }

  const Index nv = (N + 1) * nx + N * nu;
  std::vector<Triplet> qt;
  for (Index k = 0; k <= N; ++k) {
    const Index off = inst.state_offset(k);
    for (Index i = 0; i < nx; ++i) {
      for (Index j = i; j < nx; ++j) {
        if (qs[i * nx + j] != 0.0) qt.push_back({off + i, off + j, 2.0 * qs[i * nx + j]});
      }
    }
    if (k < N) {
      const Index uoff = inst.input_offset(k);
      for (Index i = 0; i < nu; ++i) qt.push_back({uoff + i, uoff + i, 2.0 * 0.01});
    }
  }

  const Index m = nx + N * nx + nv;
  std::vector<Triplet> at;
  QpProblem& p = inst.qp;
  p.l.assign(static_cast<std::size_t>(m), 0.0);
  p.u.assign(static_cast<std::size_t>(m), 0.0);
  for (Index i = 0; i < nx; ++i) {
    at.push_back({i, i, 1.0});
    p.l[i] = p.u[i] = inst.x_init[i];
  }
  for (Index k = 0; k < N; ++k) {
    const Index row0 = nx + k * nx;
    const Index xk = inst.state_offset(k);
    const Index uk = inst.input_offset(k);
    const Index xk1 = inst.state_offset(k + 1);
    for (Index i = 0; i < nx; ++i) {
      at.push_back({row0 + i, xk1 + i, 1.0});
      for (Index j = 0; j < nx; ++j) {
        const double v = inst.a[i * nx + j];
        if (v != 0.0) at.push_back({row0 + i, xk + j, -v});
      }
      for (Index j = 0; j < nu; ++j) {
        const double v = inst.b[i * nu + j];
        if (v != 0.0) at.push_back({row0 + i, uk + j, -v});
      }
    }
  }
  const Index box0 = nx + N * nx;
  for (Index k = 0; k <= N; ++k) {
    const Index xk = inst.state_offset(k);
    for (Index i = 0; i < nx; ++i) {
      at.push_back({box0 + xk + i, xk + i, 1.0});
      p.l[box0 + xk + i] = -inst.x_bound[i];
      p.u[box0 + xk + i] = inst.x_bound[i];
    }
    if (k == N) break;
    const Index uk = inst.input_offset(k);
    for (Index i = 0; i < nu; ++i) {
      at.push_back({box0 + uk + i, uk + i, 1.0});
      p.l[box0 + uk + i] = -inst.u_bound[i];
      p.u[box0 + uk + i] = inst.u_bound[i];
    }
  }
  p.Q = SparseMatrix::from_triplets(nv, nv, qt, Symmetry::upper);
  p.q.assign(static_cast<std::size_t>(nv), 0.0);
  p.A = SparseMatrix::from_triplets(m, nv, at);
  return inst;
}

QpProblem gen_mpc(Index nx, Index nu, Index horizon, std::uint64_t seed) {
  MpcOptions o;
  o.nx = nx;
  o.nu = nu;
  o.horizon = horizon;
  o.seed = seed;
  return gen_mpc(o).qp;
}

void set_initial_state(MpcInstance& inst, std::span<const double> x_init) {
  if (static_cast<Index>(x_init.size()) != inst.nx) {
    throw std::invalid_argument("set_initial_state: dimension mismatch");
  }
  inst.x_init.assign(x_init.begin(), x_init.end());
  for (Index i = 0; i < inst.nx; ++i) inst.qp.l[i] = inst.qp.u[i] = x_init[i];
}

std::pair<Vector, Vector> shift_warm_start(const MpcInstance& inst,
                                           std::span<const double> z,
                                           std::span<const double> y) {
  const Index nx = inst.nx;
  const Index nu = inst.nu;
  const Index N = inst.horizon;
  const Index stage = nx + nu;
  const auto nv = static_cast<Index>(z.size());
  if (nv != inst.qp.n() || static_cast<Index>(y.size()) != inst.qp.m()) {
    throw std::invalid_argument("shift_warm_start: dimension mismatch");
  }
  // Variables and their box rows share one layout, shifted by one stage.
  auto shift_blocks = [&](std::span<const double> src, std::span<double> dst) {
    for (Index k = 0; k < N - 1; ++k) {
      for (Index i = 0; i < stage; ++i) dst[k * stage + i] = src[(k + 1) * stage + i];
    }
    const Index last = (N - 1) * stage;
    for (Index i = 0; i < nx; ++i) dst[last + i] = src[N * stage + i];
    for (Index i = 0; i < nu; ++i) dst[last + nx + i] = src[last + nx + i];
    for (Index i = 0; i < nx; ++i) dst[N * stage + i] = src[N * stage + i];
  };
  Vector zs(z.size());
  shift_blocks(z, zs);

  Vector ys(y.size());
  for (Index i = 0; i < nx; ++i) ys[i] = y[nx + i];
  for (Index k = 0; k < N; ++k) {
    const Index src_k = std::min(k + 1, N - 1);
    for (Index i = 0; i < nx; ++i) ys[nx + k * nx + i] = y[nx + src_k * nx + i];
  }
  const Index box0 = nx + N * nx;
  shift_blocks(y.subspan(static_cast<std::size_t>(box0)),
               std::span<double>(ys).subspan(static_cast<std::size_t>(box0)));
  return {std::move(zs), std::move(ys)};
}

QpProblem gen_random_qp(const RandomQpOptions& o) {
  if (!(o.density > 0.0 && o.density <= 1.0)) {
    throw std::invalid_argument("gen_random_qp: density must lie in (0, 1]");
  }
  if (o.n < 1 || o.m < 0) throw std::invalid_argument("gen_random_qp: bad dimensions");
  Rng rng(o.seed);
  const Index n = o.n;
  const Index m = o.m;
  QpProblem p;
  std::vector<Triplet> qt;
  if (o.convex) {
    // Q = G'G + 1e-2 I, accumulated row by row of G.
    std::vector<std::pair<Index, double>> row;
    for (Index r = 0; r < n; ++r) {
      row.clear();
      for (Index j = 0; j < n; ++j) {
        if (bernoulli(rng, o.density)) row.emplace_back(j, normal(rng, 0.0, 1.0));
      }
      for (std::size_t a = 0; a < row.size(); ++a) {
        for (std::size_t b = a; b < row.size(); ++b) {
          qt.push_back({row[a].first, row[b].first, row[a].second * row[b].second});
        }
      }
    }
    for (Index i = 0; i < n; ++i) qt.push_back({i, i, 1e-2});
  } else {
    // Random orthogonal V from Gram-Schmidt on a Gaussian matrix.
    Vector v(static_cast<std::size_t>(n * n));
    for (double& e : v) e = normal(rng, 0.0, 1.0);
    for (Index c = 0; c < n; ++c) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Index d = 0; d < c; ++d) {
          double s = 0.0;
          for (Index i = 0; i < n; ++i) s += v[i * n + c] * v[i * n + d];
          for (Index i = 0; i < n; ++i) v[i * n + c] -= s * v[i * n + d];
        }
      }
      double nrm = 0.0;
      for (Index i = 0; i < n; ++i) nrm += v[i * n + c] * v[i * n + c];
      nrm = std::sqrt(nrm);
      for (Index i = 0; i < n; ++i) v[i * n + c] /= nrm;
    }
    Vector lambda(static_cast<std::size_t>(n));
    lambda[0] = o.min_eig;
    for (Index i = 1; i < n; ++i) lambda[i] = uniform(rng, o.min_eig, o.max_eig);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        double s = 0.0;
        for (Index k = 0; k < n; ++k) s += v[i * n + k] * lambda[k] * v[j * n + k];
        qt.push_back({i, j, s});
      }
    }
  }
  p.Q = SparseMatrix::from_triplets(n, n, qt, Symmetry::upper);
  p.q.resize(static_cast<std::size_t>(n));
  for (double& e : p.q) e = normal(rng, 0.0, 1.0);

  std::vector<Triplet> at;
  if (m > 0) {
    std::vector<char> covered(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (bernoulli(rng, o.density)) {
          at.push_back({i, j, normal(rng, 0.0, 1.0)});
          covered[j] = 1;
        }
      }
    }
    std::uniform_int_distribution<Index> pick(0, m - 1);
    for (Index j = 0; j < n; ++j) {
      if (!covered[j]) at.push_back({pick(rng), j, normal(rng, 0.0, 1.0)});
    }
  }
  p.A = SparseMatrix::from_triplets(m, n, at);
  Vector xf(static_cast<std::size_t>(n));
  for (double& e : xf) e = normal(rng, 0.0, 1.0);
  const Vector v = p.A.multiply(xf);
  p.l.resize(static_cast<std::size_t>(m));
  p.u.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    if (bernoulli(rng, o.equality_fraction)) {
      p.l[i] = p.u[i] = v[i];
      continue;
    }
    p.l[i] = v[i] - uniform(rng, 0.1, 1.0);
    p.u[i] = v[i] + uniform(rng, 0.1, 1.0);
    if (bernoulli(rng, o.infinite_bound_fraction)) p.l[i] = -INFINITY;
    if (bernoulli(rng, o.infinite_bound_fraction)) p.u[i] = INFINITY;
  }
  return p;
}

QpProblem gen_random_qp(Index n, Index m, double density, bool convex, std::uint64_t seed) {
  RandomQpOptions o;
  o.n = n;
  o.m = m;
  o.density = density;
  o.convex = convex;
  o.seed = seed;
  return gen_random_qp(o);
}

}  // namespace qpalm
