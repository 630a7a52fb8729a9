#pragma once

#include <optional>
#include <string>

#include "kslab/smooth.hpp"
#include "kslab/types.hpp"

namespace kslab {

// One of the scalar data functions describing a surface: B(z) or one of the
// theta-profiles a, b, c.  Values and derivatives come from the same Smooth1
// (closed-form tree, spline, or expression), so downstream operators always
// differentiate consistently instead of falling back to finite differences.
struct Profile1D {
  Smooth1Ptr fn;
  std::optional<Real> period;  // set for theta-profiles

  Real value(Real x) const { return fn->deriv(0, x); }
  Real operator()(Real x) const { return fn->deriv(0, x); }
  Real deriv(Real x) const { return fn->deriv(1, x); }
  Real deriv(int order, Real x) const { return fn->deriv(order, x); }
};

inline Profile1D make_profile(Smooth1Ptr fn, std::optional<Real> period = {}) {
  return Profile1D{std::move(fn), period};
}

inline Profile1D constant_profile(Real v, std::optional<Real> period = {}) {
  return Profile1D{s1_const(v), period};
}

// Consistency checks a profile must pass before a surface is built from it:
//  - the declared first derivative agrees with a central difference of the
//    values (step 1e-5, relative tolerance 1e-6) at 100 seeded random points
//    of `domain`; violation raises InvalidArgument naming the profile;
//  - when a period is set, |f(x+p) - f(x)| <= 1e-10 at sampled points;
//    violation raises NonPeriodic.
void validate_profile(const Profile1D& f, const std::string& name, Interval domain);

}  // namespace kslab
