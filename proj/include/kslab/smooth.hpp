#pragma once

#include <memory>
#include <vector>

#include "kslab/types.hpp"

namespace kslab {

// ---------------------------------------------------------------------------
// Smooth1: scalar function of one variable exposing derivatives of any
// requested order.  Everything the ansatz constructions consume (surface
// profiles, oscillation factors, cutoffs) is assembled from these, so that
// third- and fourth-order derivatives of composite fields are exact rather
// than finite-differenced.
// ---------------------------------------------------------------------------

class Smooth1 {
 public:
  virtual ~Smooth1() = default;
  // d^order/dx^order at x.  order >= 0.
  virtual Real deriv(int order, Real x) const = 0;
  Real operator()(Real x) const { return deriv(0, x); }
};

using Smooth1Ptr = std::shared_ptr<const Smooth1>;

Smooth1Ptr s1_const(Real c);
// Polynomial with coefficients c[0] + c[1] x + c[2] x^2 + ...
Smooth1Ptr s1_poly(std::vector<Real> coeffs);
// amp * cos(freq * x + phase); use phase = -pi/2 for a sine.
Smooth1Ptr s1_harmonic(Real amp, Real freq, Real phase);
Smooth1Ptr s1_cos(Real freq = 1.0, Real phase = 0.0);
Smooth1Ptr s1_sin(Real freq = 1.0, Real phase = 0.0);
// C-infinity bump exp(-1/(1-s^2)), s = (x-center)/halfwidth, zero outside.
Smooth1Ptr s1_bump(Real center, Real halfwidth);
// sin^2(pi (x-a)/(b-a)): vanishes with vanishing first derivative at a and b.
Smooth1Ptr s1_sin_sq_window(Real a, Real b);

Smooth1Ptr s1_sum(Smooth1Ptr a, Smooth1Ptr b);
Smooth1Ptr s1_scale(Real k, Smooth1Ptr f);
Smooth1Ptr s1_prod(Smooth1Ptr a, Smooth1Ptr b);
// a / b via the Leibniz recurrence; throws ZeroDenominator on |b| ~ 0.
Smooth1Ptr s1_quot(Smooth1Ptr a, Smooth1Ptr b);
// f(alpha * x + beta)
Smooth1Ptr s1_affine_arg(Smooth1Ptr f, Real alpha, Real beta);
// k-th derivative of f as a function in its own right.
Smooth1Ptr s1_deriv(Smooth1Ptr f, int k = 1);

// ---------------------------------------------------------------------------
// Smooth2: scalar function of two variables (used as (theta, z) or (x, y))
// exposing tables of mixed partials.  Composite nodes propagate derivative
// tables bottom-up: products use the 2D Leibniz rule, quotients the inverse
// recurrence, so arbitrary mixed partials of deeply nested expressions stay
// exact to rounding.
// ---------------------------------------------------------------------------

// Fixed-capacity derivative table; entry (i, j) holds d^i_x d^j_y f.
constexpr int kMaxDerivOrder = 7;
using DTable = Eigen::Matrix<Real, kMaxDerivOrder + 1, kMaxDerivOrder + 1>;

class Smooth2 {
 public:
  virtual ~Smooth2() = default;
  // Fill out(i, j) for all i <= mx, j <= my.
  virtual void derivs(Real x, Real y, int mx, int my, DTable& out) const = 0;
  Real value(Real x, Real y) const {
    DTable t;
    derivs(x, y, 0, 0, t);
    return t(0, 0);
  }
  Real deriv(int dx, int dy, Real x, Real y) const {
    DTable t;
    derivs(x, y, dx, dy, t);
    return t(dx, dy);
  }
};

using Smooth2Ptr = std::shared_ptr<const Smooth2>;

Smooth2Ptr s2_from_x(Smooth1Ptr f);
Smooth2Ptr s2_from_y(Smooth1Ptr f);
Smooth2Ptr s2_const(Real c);
// Separable product fx(x) * fy(y).
Smooth2Ptr s2_sep(Smooth1Ptr fx, Smooth1Ptr fy);
Smooth2Ptr s2_sum(Smooth2Ptr a, Smooth2Ptr b);
Smooth2Ptr s2_scale(Real k, Smooth2Ptr f);
Smooth2Ptr s2_prod(Smooth2Ptr a, Smooth2Ptr b);
Smooth2Ptr s2_quot(Smooth2Ptr a, Smooth2Ptr b);
Smooth2Ptr s2_dx(Smooth2Ptr f, int k = 1);
Smooth2Ptr s2_dy(Smooth2Ptr f, int k = 1);
// f(alpha * x + beta, y)
Smooth2Ptr s2_affine_x(Smooth2Ptr f, Real alpha, Real beta);
// Identically zero (with all derivatives) outside the open box; the wrapped
// function must itself vanish there for the mask to be exact.
Smooth2Ptr s2_support_box(Smooth2Ptr f, Interval x_box, Interval y_box);
// Tabulated field, periodic in x: values(i, j) at x_i = i * x_period / rows
// (i = 0..rows-1) and y_j uniform over y_range endpoints included
// (j = 0..cols-1). Node first derivatives come from 4th-order central
// differences (periodic wrap in x; one-sided 2nd-order at the y-boundaries),
// and off-node evaluation interpolates the value and derivative tables with
// local cubics. Supports orders (0,0), (1,0), (0,1) only; anything higher is
// refused because the tables do not carry that accuracy.
Smooth2Ptr s2_grid_sampled(const Eigen::MatrixXd& values, Real x_period,
                           Interval y_range);

inline Real binomial(int n, int k) {
  static const auto table = [] {
    Eigen::Matrix<Real, 2 * kMaxDerivOrder + 2, 2 * kMaxDerivOrder + 2> c;
    c.setZero();
    for (int i = 0; i < c.rows(); ++i) {
      c(i, 0) = 1.0;
      for (int j = 1; j <= i; ++j)
        c(i, j) = c(i - 1, j - 1) + (j < i ? c(i - 1, j) : 0.0);
    }
    return c;
  }();
  return table(n, k);
}

}  // namespace kslab
