#pragma once

#include <span>

#include "qpalm/problem.hpp"

namespace qpalm {

/// psi'(tau) = eta tau + beta + <delta, [delta tau - alpha]_+>, the
/// derivative of the subproblem objective along a direction.
struct PwaDerivative {
  double eta = 0.0;
  double beta = 0.0;
  Vector delta;
  Vector alpha;

  double operator()(double tau) const;
  /// psi(tau) - psi(0), the antiderivative vanishing at 0.
  double primitive(double tau) const;
};

/// Fields of psi' for the subproblem at x with direction d:
/// eta = <d, (Q + Sigma_x^{-1}) d>, beta = <d, Qx + Sigma_x^{-1}(x - xhat) + q>,
/// delta = [-Sigma_y^{1/2} Ad ; Sigma_y^{1/2} Ad],
/// alpha = Sigma_y^{-1/2} [y + Sigma_y(Ax - l) ; Sigma_y(u - Ax) - y].
PwaDerivative build_derivative(const QpProblem& p, std::span<const double> x,
                               std::span<const double> xhat,
                               std::span<const double> d,
                               std::span<const double> y,
                               std::span<const double> sigma_y,
                               std::span<const double> sigma_x_inv);

/// The unique zero of psi' (requires eta > 0). Breakpoints alpha_i/delta_i
/// with delta_i != 0 are sorted; pairs with alpha_i = +inf never activate
/// and are skipped. The bracketing breakpoints are located by bisection on
/// the sorted list and the zero is interpolated between them; zeros left of
/// the first or right of the last breakpoint come from the affine end piece.
double exact_linesearch(const PwaDerivative& pwa);

}  // namespace qpalm
