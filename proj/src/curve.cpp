#include "kslab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "kslab/quadrature.hpp"
#include "kslab/spline.hpp"

namespace kslab {

Vec3 ArcCurve::point(Real theta) const {
  return Vec3(component[0]->deriv(0, theta), component[1]->deriv(0, theta),
              component[2]->deriv(0, theta));
}

Vec3 ArcCurve::tangent(Real theta) const {
  return Vec3(component[0]->deriv(1, theta), component[1]->deriv(1, theta),
              component[2]->deriv(1, theta));
}

Vec3 ArcCurve::second(Real theta) const {
  return Vec3(component[0]->deriv(2, theta), component[1]->deriv(2, theta),
              component[2]->deriv(2, theta));
}

Real unit_speed_defect(const ArcCurve& curve, int n) {
  Real worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real theta = curve.length * Real(i) / Real(n);
    worst = std::max(worst, std::abs(curve.tangent(theta).norm() - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Curve file ingestion
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  fail(ErrorCode::ParseError, os.str());
}

}  // namespace

CurveSamples parse_curve_samples(std::istream& in, const std::string& source_name) {
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) parse_fail(source_name, 1, "empty input");
  ++lineno;
  std::istringstream header(line);
  std::string kind;
  long n = 0;
  std::string extra;
  if (!(header >> kind >> n) || (header >> extra))
    parse_fail(source_name, lineno, "expected header 'planar N' or 'spherical N'");
  CurveSamples out;
  if (kind == "planar") out.spherical = false;
  else if (kind == "spherical") out.spherical = true;
  else parse_fail(source_name, lineno, "unknown curve kind '" + kind + "'");
  if (n < 3) parse_fail(source_name, lineno, "sample count must be at least 3");

  const int coords = out.spherical ? 3 : 2;
  out.points.reserve(static_cast<std::size_t>(n));
  while (static_cast<long>(out.points.size()) < n) {
    if (!std::getline(in, line))
      parse_fail(source_name, lineno + 1,
                 "unexpected end of input: expected " + std::to_string(n) + " rows");
    ++lineno;
    std::istringstream row(line);
    Vec3 pt = Vec3::Zero();
    for (int c = 0; c < coords; ++c) {
      if (!(row >> pt[c]))
        parse_fail(source_name, lineno,
                   "expected " + std::to_string(coords) + " coordinates");
    }
    if (row >> extra) parse_fail(source_name, lineno, "trailing data '" + extra + "'");
    if (!pt.allFinite()) parse_fail(source_name, lineno, "non-finite coordinate");
    out.points.push_back(pt);
  }

  // Anything after the data block except whitespace is malformed.
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      parse_fail(source_name, lineno, "trailing data after sample rows");
  }
  return out;
}

CurveSamples read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open curve file '" + path + "'");
  return parse_curve_samples(in, path);
}

// ---------------------------------------------------------------------------
// Sampled-curve reparametrization
// ---------------------------------------------------------------------------

namespace {

// Crossing test for closed polygons, with adjacent segments excluded.
bool segments_cross(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const auto orient = [](const Vec3& p, const Vec3& q, const Vec3& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const Real o1 = orient(a, b, c), o2 = orient(a, b, d);
  const Real o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 &&
         o3 != 0 && o4 != 0;
}

}  // namespace

bool polygon_self_intersects(const std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    const Vec3& a = pts[static_cast<std::size_t>(i)];
    const Vec3& b = pts[static_cast<std::size_t>((i + 1) % n)];
    const Real lo_x = std::min(a.x(), b.x()), hi_x = std::max(a.x(), b.x());
    const Real lo_y = std::min(a.y(), b.y()), hi_y = std::max(a.y(), b.y());
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // closing segment is adjacent to segment 0
      const Vec3& c = pts[static_cast<std::size_t>(j)];
      const Vec3& d = pts[static_cast<std::size_t>((j + 1) % n)];
      if (std::max(c.x(), d.x()) < lo_x || std::min(c.x(), d.x()) > hi_x ||
          std::max(c.y(), d.y()) < lo_y || std::min(c.y(), d.y()) > hi_y)
        continue;
      if (segments_cross(a, b, c, d)) return true;
    }
  }
  return false;
}

namespace {

// Gamma(theta) = S(T(theta)) for one coordinate: spline in the sample
// parameter composed with the monotone arclength inversion.  Two derivatives
// are available (the inversion is C^1); higher orders are refused rather than
// silently wrong.
class ArcComponent final : public Smooth1 {
 public:
  ArcComponent(std::shared_ptr<const PeriodicCubicSpline> s,
               std::shared_ptr<const MonotoneHermite> inv, Real p)
      : s_(std::move(s)), inv_(std::move(inv)), p_(p) {}

  Real deriv(int order, Real theta) const override {
    Real w = theta - p_ * std::floor(theta / p_);
    const Real tau = (*inv_)(w);
    switch (order) {
      case 0:
        return s_->deriv(0, tau);
      case 1:
        return s_->deriv(1, tau) * inv_->derivative(w);
      case 2: {
        const Real t1 = inv_->derivative(w);
        return s_->deriv(2, tau) * t1 * t1 + s_->deriv(1, tau) * inv_->second_derivative(w);
      }
      default:
        fail(ErrorCode::InvalidArgument,
             "sampled curves expose two derivatives; order " + std::to_string(order) +
                 " requested");
    }
  }

 private:
  std::shared_ptr<const PeriodicCubicSpline> s_;
  std::shared_ptr<const MonotoneHermite> inv_;
  Real p_;
};

}  // namespace

ArcCurve make_arc_curve(const CurveSamples& samples) {
  std::vector<Vec3> pts = samples.points;

  // Drop an explicitly repeated closing point.
  if (pts.size() >= 2 && (pts.front() - pts.back()).norm() < 1e-12) pts.pop_back();
  const int n = static_cast<int>(pts.size());
  if (n < 16)
    fail(ErrorCode::InvalidArgument,
         "closed-curve reparametrization needs at least 16 samples, got " + std::to_string(n));

  if (samples.spherical) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(pts[static_cast<std::size_t>(j)].norm() - 1.0) > 1e-10)
        fail(ErrorCode::InvalidArgument,
             "spherical curve sample " + std::to_string(j) + " is not on the unit sphere");
      if (pts[static_cast<std::size_t>(j)].z() <= 0)
        fail(ErrorCode::InvalidArgument,
             "spherical curve sample " + std::to_string(j) +
                 " is not in the northern hemisphere");
    }
  }

  // The closing segment must look like one more sample step, otherwise the
  // input was not a closed-curve sampling.
  std::vector<Real> seg(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    seg[static_cast<std::size_t>(j)] =
        (pts[static_cast<std::size_t>((j + 1) % n)] - pts[static_cast<std::size_t>(j)]).norm();
  std::vector<Real> sorted = seg;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const Real median = sorted[static_cast<std::size_t>(n / 2)];
  if (median <= 0) fail(ErrorCode::InvalidArgument, "curve contains coincident samples");
  if (seg.back() > 10 * median)
    fail(ErrorCode::NonClosed,
         "gap between last and first sample is " + std::to_string(seg.back() / median) +
             " median steps; curve does not close");

  if (!samples.spherical && polygon_self_intersects(pts))
    fail(ErrorCode::SelfIntersection, "curve samples trace a self-intersecting polygon");

  // Coordinate splines in the uniform sample parameter tau, period n.
  std::vector<Real> tau(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) tau[static_cast<std::size_t>(j)] = Real(j);
  std::array<std::shared_ptr<const PeriodicCubicSpline>, 3> S;
  for (int k = 0; k < 3; ++k) {
    std::vector<Real> vals(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) vals[static_cast<std::size_t>(j)] = pts[static_cast<std::size_t>(j)][k];
    S[static_cast<std::size_t>(k)] =
        std::make_shared<PeriodicCubicSpline>(tau, std::move(vals), Real(n));
  }

  const auto speed = [&](Real t) {
    const Vec3 d(S[0]->deriv(1, t), S[1]->deriv(1, t), S[2]->deriv(1, t));
    return d.norm();
  };
  const auto speed_rate = [&](Real t) {  // d|S'|/dtau
    const Vec3 d1(S[0]->deriv(1, t), S[1]->deriv(1, t), S[2]->deriv(1, t));
    const Vec3 d2(S[0]->deriv(2, t), S[1]->deriv(2, t), S[2]->deriv(2, t));
    return d1.dot(d2) / d1.norm();
  };

  // Node arclengths: per-interval trapezoid with the endpoint-derivative
  // correction (fourth-order accurate); the corrections cancel around the
  // closed curve, so the total is the plain periodic trapezoid value.
  const int sub = 8;
  const Real dt = 1.0 / sub;
  std::vector<Real> s(static_cast<std::size_t>(n) + 1);
  s[0] = 0.0;
  for (int j = 0; j < n; ++j) {
    Real acc = 0.5 * (speed(Real(j)) + speed(Real(j) + 1.0));
    for (int q = 1; q < sub; ++q) acc += speed(Real(j) + q * dt);
    acc *= dt;
    acc -= dt * dt / 12.0 * (speed_rate(Real(j) + 1.0) - speed_rate(Real(j)));
    s[static_cast<std::size_t>(j) + 1] = s[static_cast<std::size_t>(j)] + acc;
  }
  const Real p = s.back();

  // Monotone inversion theta -> tau with exact reciprocal-speed slopes, so the
  // composite is unit-speed at every node.
  std::vector<Real> inv_y(static_cast<std::size_t>(n) + 1), slopes(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    inv_y[static_cast<std::size_t>(j)] = Real(j);
    slopes[static_cast<std::size_t>(j)] = 1.0 / speed(Real(j % n));
  }
  auto inv = std::make_shared<const MonotoneHermite>(s, std::move(inv_y), std::move(slopes));

  // Node curvatures from the raw samples (fourth-order stencils in the sample
  // index), splined over arclength.  For planar curves this is the signed
  // curvature; for spherical curves the triple product (sigma, sigma', sigma'')
  // with respect to arclength.
  std::vector<Real> kappa(static_cast<std::size_t>(n));
  const auto at = [&](int j) -> const Vec3& {
    return pts[static_cast<std::size_t>(((j % n) + n) % n)];
  };
  for (int j = 0; j < n; ++j) {
    const Vec3 d1 = (-at(j + 2) + 8 * at(j + 1) - 8 * at(j - 1) + at(j - 2)) / 12.0;
    const Vec3 d2 = (-at(j + 2) + 16 * at(j + 1) - 30 * at(j) + 16 * at(j - 1) - at(j - 2)) / 12.0;
    const Real g = d1.norm();
    if (g <= 0) fail(ErrorCode::InvalidArgument, "degenerate tangent in curvature stencil");
    if (samples.spherical)
      kappa[static_cast<std::size_t>(j)] = at(j).dot(d1.cross(d2)) / (g * g * g);
    else
      kappa[static_cast<std::size_t>(j)] =
          (d1.x() * d2.y() - d1.y() * d2.x()) / (g * g * g);
  }
  std::vector<Real> knots(s.begin(), s.end() - 1);
  PeriodicCubicSpline curvature_spline(std::move(knots), std::move(kappa), p);

  ArcCurve out;
  out.spherical = samples.spherical;
  out.length = p;
  for (int k = 0; k < 3; ++k)
    out.component[static_cast<std::size_t>(k)] =
        std::make_shared<ArcComponent>(S[static_cast<std::size_t>(k)], inv, p);
  out.curvature = make_profile(s1_periodic_spline(std::move(curvature_spline)), p);
  out.collocation.assign(s.begin(), s.end() - 1);
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form curves
// ---------------------------------------------------------------------------

ArcCurve circle_curve(Real radius) {
  if (!(radius > 0)) fail(ErrorCode::InvalidArgument, "circle radius must be positive");
  ArcCurve out;
  out.spherical = false;
  out.length = 2 * kPi * radius;
  out.component = {s1_harmonic(radius, 1.0 / radius, 0.0),
                   s1_harmonic(radius, 1.0 / radius, -kPi / 2), s1_const(0.0)};
  out.curvature = constant_profile(1.0 / radius, out.length);
  return out;
}

ArcCurve spherical_circle_curve(Real colatitude) {
  if (!(colatitude > 0) || !(colatitude < kPi / 2))
    fail(ErrorCode::InvalidArgument,
         "spherical circle colatitude must lie in (0, pi/2) for a northern-cap curve");
  const Real sin_a = std::sin(colatitude), cos_a = std::cos(colatitude);
  ArcCurve out;
  out.spherical = true;
  out.length = 2 * kPi * sin_a;
  out.component = {s1_harmonic(sin_a, 1.0 / sin_a, 0.0),
                   s1_harmonic(sin_a, 1.0 / sin_a, -kPi / 2), s1_const(cos_a)};
  out.curvature = constant_profile(cos_a / sin_a, out.length);
  return out;
}

ArcCurve ellipse_curve(Real ax, Real ay, int n_samples) {
  if (!(ax > 0) || !(ay > 0)) fail(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  CurveSamples cs;
  cs.spherical = false;
  cs.points.reserve(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) {
    const Real u = 2 * kPi * Real(j) / Real(n_samples);
    cs.points.emplace_back(ax * std::cos(u), ay * std::sin(u), 0.0);
  }
  return make_arc_curve(cs);
}

// ---------------------------------------------------------------------------
// Flat-segment curve
// ---------------------------------------------------------------------------

namespace {

constexpr Real kFlatS0 = 1.0;                 // straight-segment length
constexpr Real kFlatPeriod = 2 * kPi + 2.0;   // total arclength p
constexpr Real kFlatHalf = kPi + 1.0;         // curvature period p/2

// Curvature: 0 on [0, 1], 2 sin^2(theta - 1) on [1, pi + 1], period pi + 1.
class FlatCurvature final : public Smooth1 {
 public:
  FlatCurvature() : window_(s1_scale(2.0, s1_sin_sq_window(kFlatS0, kFlatHalf))) {}

  Real deriv(int order, Real theta) const override {
    Real w = theta - kFlatHalf * std::floor(theta / kFlatHalf);
    if (w < kFlatS0) return 0.0;
    return window_->deriv(order, w);
  }

 private:
  Smooth1Ptr window_;
};

// Turning angle psi(theta) = integral of the curvature, in piecewise closed form.
Real flat_turning(Real theta) {
  const Real k = std::floor(theta / kFlatHalf);
  const Real w = theta - kFlatHalf * k;
  Real psi = k * kPi;
  if (w > kFlatS0) {
    const Real v = w - kFlatS0;
    psi += v - 0.5 * std::sin(2 * v);  // integral of 2 sin^2
  }
  return psi;
}

// One coordinate of Gamma(theta) = integral of (cos psi, sin psi).  Values are
// assembled from cached breakpoint sums plus an exact flat-piece increment or
// a Gauss panel over the partial arc; derivatives of every order follow from
// the recurrences (cos psi)' = -kappa sin psi, (sin psi)' = kappa cos psi.
class FlatComponent final : public Smooth1 {
 public:
  FlatComponent(int coord) : coord_(coord), kappa_(std::make_shared<FlatCurvature>()) {
    // Cumulative Gamma at breakpoints 0, s0, p/2, p/2 + s0, p.
    break_theta_ = {0.0, kFlatS0, kFlatHalf, kFlatHalf + kFlatS0, kFlatPeriod};
    break_value_.assign(5, 0.0);
    for (int i = 1; i < 5; ++i)
      break_value_[static_cast<std::size_t>(i)] =
          break_value_[static_cast<std::size_t>(i) - 1] +
          integrate_piece(break_theta_[static_cast<std::size_t>(i) - 1],
                          break_theta_[static_cast<std::size_t>(i)]);
  }

  Real deriv(int order, Real theta) const override {
    if (order == 0) return value(theta);
    // Derivative tables of u = cos psi, v = sin psi up to the needed order.
    const int m = order - 1;
    if (m + 1 > kMaxDerivOrder + 1)
      fail(ErrorCode::InvalidArgument, "derivative order out of range for curve component");
    Real u[kMaxDerivOrder + 2], v[kMaxDerivOrder + 2], kd[kMaxDerivOrder + 2];
    const Real psi = flat_turning(theta);
    u[0] = std::cos(psi);
    v[0] = std::sin(psi);
    for (int j = 0; j <= m; ++j) kd[j] = kappa_->deriv(j, theta);
    for (int k = 0; k < m; ++k) {
      Real du = 0.0, dv = 0.0;
      for (int j = 0; j <= k; ++j) {
        const Real bc = binomial(k, j);
        du -= bc * kd[j] * v[k - j];
        dv += bc * kd[j] * u[k - j];
      }
      u[k + 1] = du;
      v[k + 1] = dv;
    }
    return coord_ == 0 ? u[m] : v[m];
  }

 private:
  Real direction(Real theta) const {
    const Real psi = flat_turning(theta);
    return coord_ == 0 ? std::cos(psi) : std::sin(psi);
  }

  Real integrate_piece(Real a, Real b) const {
    // Within one piece psi is either constant (flat) or analytic (arc).
    const Real mid = 0.5 * (a + b);
    const Real w = mid - kFlatHalf * std::floor(mid / kFlatHalf);
    if (w < kFlatS0) return (b - a) * direction(mid);
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.2)));
    const Rule1D rule = gauss_legendre_panels(12, panels, a, b);
    return rule.integrate([&](Real t) { return direction(t); });
  }

  Real value(Real theta) const {
    const Real k = std::floor(theta / kFlatPeriod);
    Real w = theta - kFlatPeriod * k;
    int piece = 0;
    while (piece < 4 && break_theta_[static_cast<std::size_t>(piece) + 1] <= w) ++piece;
    return break_value_[static_cast<std::size_t>(piece)] +
           integrate_piece(break_theta_[static_cast<std::size_t>(piece)], w);
  }

  int coord_;
  Smooth1Ptr kappa_;
  std::array<Real, 5> break_theta_;
  std::vector<Real> break_value_;
};

}  // namespace

Interval flat_segment_arc() { return Interval{0.0, kFlatS0}; }

ArcCurve flat_segment_curve() {
  ArcCurve out;
  out.spherical = false;
  out.length = kFlatPeriod;
  out.component = {std::make_shared<FlatComponent>(0), std::make_shared<FlatComponent>(1),
                   s1_const(0.0)};
  out.curvature = make_profile(std::make_shared<FlatCurvature>(), kFlatPeriod);
  return out;
}

}  // namespace kslab
