#include "kslab/profile.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace kslab {

void validate_profile(const Profile1D& f, const std::string& name, Interval domain) {
  if (!f.fn) fail(ErrorCode::InvalidArgument, "profile '" + name + "' has no function");

  // Derivative-vs-difference agreement at seeded random points.  The interior
  // margin keeps the difference stencil inside the domain.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  const Real step = 1e-5;
  const Real margin = 2 * step * std::max(Real(1), std::abs(domain.lo) + std::abs(domain.hi));
  for (int k = 0; k < 100; ++k) {
    const Real frac = Real(rng() >> 11) * 0x1.0p-53;
    const Real x = domain.lo + margin + frac * (domain.length() - 2 * margin);
    const Real fd = (f.value(x + step) - f.value(x - step)) / (2 * step);
    const Real an = f.deriv(x);
    const Real scale = std::max({std::abs(an), std::abs(f.value(x)), Real(1)});
    if (!std::isfinite(fd) || !std::isfinite(an) || std::abs(fd - an) > 1e-6 * scale) {
      std::ostringstream os;
      os << "profile '" << name << "': derivative " << an
         << " disagrees with central difference " << fd << " at x = " << x;
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }

  if (f.period) {
    const Real p = *f.period;
    if (!(p > 0)) fail(ErrorCode::NonPeriodic, "profile '" + name + "' has nonpositive period");
    for (int k = 0; k < 64; ++k) {
      const Real x = domain.lo + (Real(k) + 0.37) / 64.0 * p;
      if (std::abs(f.value(x + p) - f.value(x)) > 1e-10) {
        std::ostringstream os;
        os << "profile '" << name << "' is not " << p << "-periodic at x = " << x;
        fail(ErrorCode::NonPeriodic, os.str());
      }
    }
  }
}

}  // namespace kslab
