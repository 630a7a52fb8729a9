#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace kslab {

using Real = double;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;

// Closed interval [lo, hi] on the real line.
struct Interval {
  Real lo = 0.0;
  Real hi = 0.0;
  Real length() const { return hi - lo; }
  bool contains(Real x, Real tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
  Real midpoint() const { return 0.5 * (lo + hi); }
};

// Every failure mode the library reports.  A single exception type carrying a
// code keeps call sites terse and lets tests assert on the exact condition.
enum class ErrorCode {
  PositivityViolation,
  NonPeriodic,
  SelfIntersection,
  NonClosed,
  ApexIncluded,
  OutOfDomain,
  NoEmbedding,
  DegenerateMetric,
  ZeroField,
  NotSeparable,
  ZeroCurvature,
  DegenerateProfileRatio,
  SupportViolation,
  CoeffVanishes,
  ZeroDenominator,
  VariantViolation,
  NonConvergence,
  NotHarmonic,
  ResolutionTooLow,
  NotPD,
  InsufficientData,
  NonPositiveValue,
  IoFailure,
  ParseError,
  ConfigError,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kslab
