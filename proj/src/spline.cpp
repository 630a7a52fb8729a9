#include "kslab/spline.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <utility>

namespace kslab {

PeriodicCubicSpline::PeriodicCubicSpline(std::vector<Real> knots,
                                         std::vector<Real> values, Real period)
    : knots_(std::move(knots)), values_(std::move(values)), period_(period) {
  const int n = static_cast<int>(knots_.size());
  if (n < 3) fail(ErrorCode::InvalidArgument, "periodic spline needs >= 3 knots");
  if (values_.size() != knots_.size())
    fail(ErrorCode::InvalidArgument, "spline knot/value count mismatch");
  if (period_ <= 0.0) fail(ErrorCode::InvalidArgument, "spline period must be positive");
  for (int i = 0; i + 1 < n; ++i)
    if (!(knots_[i] < knots_[i + 1]))
      fail(ErrorCode::InvalidArgument, "spline knots must be strictly increasing");
  if (!(knots_.back() < knots_.front() + period_))
    fail(ErrorCode::InvalidArgument, "spline knots exceed one period");

  // C2 continuity of the piecewise cubic at every knot yields a cyclic
  // tridiagonal SPD system for the knot second derivatives.
  auto h = [&](int i) {
    return i + 1 < n ? knots_[i + 1] - knots_[i]
                     : knots_[0] + period_ - knots_[n - 1];
  };
  auto y = [&](int i) { return values_[(i % n + n) % n]; };
  Eigen::SparseMatrix<Real> A(n, n);
  Eigen::VectorXd rhs(n);
  std::vector<Eigen::Triplet<Real>> trip;
  trip.reserve(3 * n);
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n, next = (i + 1) % n;
    const Real hp = h(prev), hi = h(i);
    trip.emplace_back(i, prev, hp / 6.0);
    trip.emplace_back(i, i, (hp + hi) / 3.0);
    trip.emplace_back(i, next, hi / 6.0);
    rhs(i) = (y(i + 1) - y(i)) / hi - (y(i) - y(i - 1)) / hp;
  }
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> solver(A);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::InvalidArgument, "periodic spline system factorization failed");
  Eigen::VectorXd m = solver.solve(rhs);
  m2_.assign(m.data(), m.data() + n);
}

int PeriodicCubicSpline::locate(Real& x) const {
  const Real x0 = knots_.front();
  x = x0 + std::fmod(x - x0, period_);
  if (x < x0) x += period_;
  // Last interval wraps from knots_.back() to x0 + period.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

Real PeriodicCubicSpline::deriv(int order, Real x) const {
  if (order > 3) return 0.0;
  if (order < 0) fail(ErrorCode::InvalidArgument, "negative derivative order");
  const int n = static_cast<int>(knots_.size());
  int i = locate(x);
  const int j = (i + 1) % n;
  const Real xi = knots_[i];
  const Real hi = (i + 1 < n ? knots_[i + 1] : knots_[0] + period_) - xi;
  const Real A = xi + hi - x, B = x - xi;  // distances to the interval ends
  const Real Mi = m2_[i], Mj = m2_[j];
  const Real yi = values_[i], yj = values_[j];
  switch (order) {
    case 0:
      return Mi * A * A * A / (6 * hi) + Mj * B * B * B / (6 * hi) +
             (yi / hi - Mi * hi / 6) * A + (yj / hi - Mj * hi / 6) * B;
    case 1:
      return -Mi * A * A / (2 * hi) + Mj * B * B / (2 * hi) -
             (yi / hi - Mi * hi / 6) + (yj / hi - Mj * hi / 6);
    case 2:
      return Mi * A / hi + Mj * B / hi;
    default:
      return (Mj - Mi) / hi;
  }
}

MonotoneHermite::MonotoneHermite(std::vector<Real> x, std::vector<Real> y,
                                 std::vector<Real> slopes)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
  const int n = static_cast<int>(x_.size());
  if (n < 2 || y_.size() != x_.size() || m_.size() != x_.size())
    fail(ErrorCode::InvalidArgument, "Hermite interpolant needs matching arrays, n >= 2");
  for (int i = 0; i + 1 < n; ++i) {
    if (!(x_[i] < x_[i + 1]))
      fail(ErrorCode::InvalidArgument, "Hermite abscissas must be strictly increasing");
    // Fritsch–Carlson: keep alpha = m_i/delta, beta = m_{i+1}/delta within the
    // circle of radius 3 so monotone data yield a monotone interpolant.
    const Real delta = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    if (delta != 0.0) {
      const Real a = m_[i] / delta, b = m_[i + 1] / delta;
      const Real r = std::sqrt(a * a + b * b);
      if (r > 3.0) {
        m_[i] *= 3.0 / r;
        m_[i + 1] *= 3.0 / r;
      }
    }
  }
}

int MonotoneHermite::locate(Real t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

Real MonotoneHermite::operator()(Real t) const {
  const int i = locate(t);
  const Real h = x_[i + 1] - x_[i], u = (t - x_[i]) / h;
  const Real h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const Real h10 = u * (1 - u) * (1 - u);
  const Real h01 = u * u * (3 - 2 * u);
  const Real h11 = u * u * (u - 1);
  return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
}

Real MonotoneHermite::derivative(Real t) const {
  const int i = locate(t);
  const Real h = x_[i + 1] - x_[i], u = (t - x_[i]) / h;
  const Real d00 = 6 * u * (u - 1) / h;
  const Real d10 = (1 - u) * (1 - 3 * u);
  const Real d01 = -d00;
  const Real d11 = u * (3 * u - 2);
  return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
}

Real MonotoneHermite::second_derivative(Real t) const {
  const int i = locate(t);
  const Real h = x_[i + 1] - x_[i], u = (t - x_[i]) / h;
  const Real s00 = (12 * u - 6) / (h * h);
  const Real s10 = (6 * u - 4) / h;
  const Real s01 = -s00;
  const Real s11 = (6 * u - 2) / h;
  return s00 * y_[i] + s10 * m_[i] + s01 * y_[i + 1] + s11 * m_[i + 1];
}

namespace {
class SplineSmooth1 final : public Smooth1 {
 public:
  explicit SplineSmooth1(PeriodicCubicSpline s) : s_(std::move(s)) {}
  Real deriv(int order, Real x) const override { return s_.deriv(order, x); }

 private:
  PeriodicCubicSpline s_;
};
}  // namespace

Smooth1Ptr s1_periodic_spline(PeriodicCubicSpline spline) {
  return std::make_shared<SplineSmooth1>(std::move(spline));
}

}  // namespace kslab
