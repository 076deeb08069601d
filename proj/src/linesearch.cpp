#include "qpalm/linesearch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpalm {

double PwaDerivative::operator()(double tau) const {
  double v = eta * tau + beta;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double h = delta[i] * tau - alpha[i];
    if (h > 0.0) v += delta[i] * h;
  }
  return v;
}

double PwaDerivative::primitive(double tau) const {
  double v = 0.5 * eta * tau * tau + beta * tau;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double h1 = std::max(delta[i] * tau - alpha[i], 0.0);
    const double h0 = std::max(-alpha[i], 0.0);
    v += 0.5 * (h1 * h1 - h0 * h0);
  }
  return v;
}

PwaDerivative build_derivative(const QpProblem& p, std::span<const double> x,
                               std::span<const double> xhat,
                               std::span<const double> d,
                               std::span<const double> y,
                               std::span<const double> sigma_y,
                               std::span<const double> sigma_x_inv) {
  const auto n = static_cast<std::size_t>(p.n());
  const auto m = static_cast<std::size_t>(p.m());
  if (x.size() != n || xhat.size() != n || d.size() != n ||
      sigma_x_inv.size() != n || y.size() != m || sigma_y.size() != m) {
    throw std::invalid_argument("build_derivative: dimension mismatch");
  }
  const Vector qd = p.Q.multiply(d);
  const Vector qx = p.Q.multiply(x);
  const Vector ad = p.A.multiply(d);
  const Vector ax = p.A.multiply(x);
  PwaDerivative f;
  for (std::size_t j = 0; j < n; ++j) {
    f.eta += d[j] * (qd[j] + sigma_x_inv[j] * d[j]);
    f.beta += d[j] * (qx[j] + sigma_x_inv[j] * (x[j] - xhat[j]) + p.q[j]);
  }
  f.delta.resize(2 * m);
  f.alpha.resize(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = std::sqrt(sigma_y[i]);
    f.delta[i] = -s * ad[i];
    f.delta[m + i] = s * ad[i];
    f.alpha[i] = (y[i] + sigma_y[i] * (ax[i] - p.l[i])) / s;
    f.alpha[m + i] = (sigma_y[i] * (p.u[i] - ax[i]) - y[i]) / s;
  }
  return f;
}

double exact_linesearch(const PwaDerivative& pwa) {
  if (!(pwa.eta > 0.0)) throw std::invalid_argument("exact_linesearch: eta must be positive");
  if (pwa.delta.size() != pwa.alpha.size()) {
    throw std::invalid_argument("exact_linesearch: delta/alpha size mismatch");
  }
  std::vector<double> t;
  double left_slope = pwa.eta;   // slope left of every breakpoint
  double right_slope = pwa.eta;  // slope right of every breakpoint
  for (std::size_t i = 0; i < pwa.delta.size(); ++i) {
    const double di = pwa.delta[i];
    if (di == 0.0 || pwa.alpha[i] == INFINITY) continue;
    t.push_back(pwa.alpha[i] / di);
    (di < 0.0 ? left_slope : right_slope) += di * di;
  }
  if (t.empty()) return -pwa.beta / pwa.eta;
  std::stable_sort(t.begin(), t.end());

  // smallest index with psi'(t_i) >= 0
  std::size_t lo = 0;
  std::size_t hi = t.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (pwa(t[mid]) >= 0.0) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (lo == t.size()) {
    const double tl = t.back();
    return tl - pwa(tl) / right_slope;
  }
  const double ti = t[lo];
  const double fi = pwa(ti);
  if (lo == 0) return ti - fi / left_slope;
  const double tp = t[lo - 1];
  const double fp = pwa(tp);
  return tp - (ti - tp) / (fi - fp) * fp;
}

}  // namespace qpalm
