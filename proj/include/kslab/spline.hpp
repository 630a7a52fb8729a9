#pragma once

#include <vector>

#include "kslab/smooth.hpp"
#include "kslab/types.hpp"

namespace kslab {

// Periodic cubic spline through (x_i, y_i), i = 0..n-1, with x_n = x_0 + period
// implied and y_n = y_0.  Knots may be non-uniform but must be strictly
// increasing.  C2 across every knot including the seam.
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline() = default;
  PeriodicCubicSpline(std::vector<Real> knots, std::vector<Real> values, Real period);

  Real operator()(Real x) const { return deriv(0, x); }
  // Analytic piecewise derivative; order 3 is piecewise constant, > 3 zero.
  Real deriv(int order, Real x) const;

  Real period() const { return period_; }
  const std::vector<Real>& knots() const { return knots_; }

 private:
  int locate(Real& x) const;  // wraps x into [x0, x0 + period), returns interval

  std::vector<Real> knots_, values_, m2_;  // m2_ = second derivatives at knots
  Real period_ = 0.0;
};

// Cubic Hermite interpolant with prescribed node slopes, used for monotone
// inversion of arclength tables.  Slopes are clamped to the Fritsch–Carlson
// region so the interpolant is monotone whenever the data are.
class MonotoneHermite {
 public:
  MonotoneHermite() = default;
  MonotoneHermite(std::vector<Real> x, std::vector<Real> y, std::vector<Real> slopes);

  Real operator()(Real t) const;
  Real derivative(Real t) const;
  // Piecewise-linear second derivative of the cubic pieces (discontinuous at
  // the knots); enough for curvature cross-checks of reparametrized curves.
  Real second_derivative(Real t) const;

 private:
  int locate(Real t) const;
  std::vector<Real> x_, y_, m_;
};

// Expose a periodic spline as a Smooth1 (derivatives above 3 are zero).
Smooth1Ptr s1_periodic_spline(PeriodicCubicSpline spline);

}  // namespace kslab
