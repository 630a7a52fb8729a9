#include "kslab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "kslab/quadrature.hpp"

namespace kslab {

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

CylinderEmbedding::CylinderEmbedding(ArcCurve curve) : curve_(std::move(curve)) {}

Vec3 CylinderEmbedding::mid(Real theta, Real z) const {
  const Vec3 g = curve_.point(theta);
  return Vec3(g.x(), g.y(), z);
}

Frame CylinderEmbedding::frame(Real theta, Real /*z*/) const {
  const Vec3 d = curve_.tangent(theta);
  const Real g = std::hypot(d.x(), d.y());
  Frame f;
  f.e_theta = Vec3(d.x() / g, d.y() / g, 0.0);
  f.e_z = Vec3(0.0, 0.0, 1.0);
  f.e_t = Vec3(d.y() / g, -d.x() / g, 0.0);  // e_theta x e_z, outward for ccw curves
  return f;
}

Real CylinderEmbedding::metric_theta(Real theta, Real /*z*/) const {
  const Vec3 d = curve_.tangent(theta);
  return std::hypot(d.x(), d.y());
}

Real CylinderEmbedding::metric_z(Real /*theta*/, Real /*z*/) const { return 1.0; }

Real CylinderEmbedding::curvature(Real theta) const {
  const Vec3 d1 = curve_.tangent(theta);
  const Vec3 d2 = curve_.second(theta);
  const Real g = std::hypot(d1.x(), d1.y());
  return (d1.x() * d2.y() - d1.y() * d2.x()) / (g * g * g);
}

ConeEmbedding::ConeEmbedding(ArcCurve curve) : curve_(std::move(curve)) {}

Vec3 ConeEmbedding::mid(Real theta, Real z) const { return z * curve_.point(theta); }

Frame ConeEmbedding::frame(Real theta, Real /*z*/) const {
  // Orthonormalize so the frame promise holds even when the directrix carries
  // sampling error; for exact curves the correction vanishes.
  const Vec3 sigma = curve_.point(theta);
  const Vec3 dsigma = curve_.tangent(theta);
  Frame f;
  f.e_z = sigma.normalized();
  f.e_theta = (dsigma - dsigma.dot(f.e_z) * f.e_z).normalized();
  f.e_t = f.e_theta.cross(f.e_z);
  return f;
}

Real ConeEmbedding::metric_theta(Real theta, Real z) const {
  return z * curve_.tangent(theta).norm();
}

Real ConeEmbedding::metric_z(Real theta, Real /*z*/) const {
  return curve_.point(theta).norm();
}

Real ConeEmbedding::curvature(Real theta) const {
  const Vec3 s = curve_.point(theta);
  const Vec3 d1 = curve_.tangent(theta);
  const Vec3 d2 = curve_.second(theta);
  const Real g = d1.norm();
  return s.dot(d1.cross(d2)) / (g * g * g);
}

// ---------------------------------------------------------------------------
// Surface data
// ---------------------------------------------------------------------------

Real ZeroGaussSurface::wrap_theta(Real theta) const {
  Real w = theta - p * std::floor(theta / p);
  if (w >= p) w -= p;  // guard against w == p from rounding
  return w;
}

Real ZeroGaussSurface::A_z(Real z) const { return B.deriv(z); }

Real ZeroGaussSurface::A_theta(Real theta, Real z) const {
  const Real w = wrap_theta(theta);
  return a(w) * B(z) + b(w);
}

Real ZeroGaussSurface::kappa_theta(Real theta, Real z) const {
  const Real w = wrap_theta(theta);
  return c(w) / (a(w) * B(z) + b(w));
}

ZeroGaussSurface build_surface(const Profile1D& B, const Profile1D& a, const Profile1D& b,
                               const Profile1D& c, Real p, Interval z_range,
                               std::shared_ptr<const Embedding> embedding,
                               int n_theta_validation, int n_z_validation) {
  if (!(p > 0)) fail(ErrorCode::InvalidArgument, "surface period p must be positive");
  if (!(z_range.hi > z_range.lo))
    fail(ErrorCode::InvalidArgument, "z_range must be a nondegenerate interval");
  if (n_theta_validation < 2 || n_z_validation < 2)
    fail(ErrorCode::InvalidArgument, "validation grid must have at least 2x2 nodes");

  ZeroGaussSurface s;
  s.B = B;
  s.p = p;
  s.z_range = z_range;
  s.embedding = std::move(embedding);

  // θ-profiles carry period p; a declared period must agree with the
  // surface's.
  const auto adopt_theta_profile = [p](const Profile1D& f, const char* name) {
    Profile1D out = f;
    if (out.period && std::abs(*out.period - p) > 1e-9 * std::max<Real>(1.0, p))
      fail(ErrorCode::NonPeriodic,
           std::string(name) + ": declared period differs from the surface period");
    out.period = p;
    return out;
  };
  s.a = adopt_theta_profile(a, "a");
  s.b = adopt_theta_profile(b, "b");
  s.c = adopt_theta_profile(c, "c");

  validate_profile(s.B, "B", z_range);
  const Interval theta_dom{0.0, p};
  validate_profile(s.a, "a", theta_dom);
  validate_profile(s.b, "b", theta_dom);
  validate_profile(s.c, "c", theta_dom);

  // Strict positivity of both metric coefficients on the validation grid.
  Real min_c = s.c(0.0);
  for (int j = 0; j < n_z_validation; ++j) {
    const Real z =
        z_range.lo + z_range.length() * Real(j) / Real(n_z_validation - 1);
    if (!(s.A_z(z) > 0)) {
      std::ostringstream os;
      os << "A_z = " << s.A_z(z) << " at z = " << z;
      fail(ErrorCode::PositivityViolation, os.str());
    }
    for (int i = 0; i < n_theta_validation; ++i) {
      const Real theta = p * Real(i) / Real(n_theta_validation);
      const Real at = s.A_theta(theta, z);
      if (!(at > 0)) {
        std::ostringstream os;
        os << "A_theta = " << at << " at (theta, z) = (" << theta << ", " << z << ")";
        fail(ErrorCode::PositivityViolation, os.str());
      }
      if (j == 0) min_c = std::min(min_c, s.c(theta));
    }
  }
  s.uniformly_convex = min_c > 0;
  return s;
}

ZeroGaussSurface cylinder_from_curve(const ArcCurve& curve, Interval z_range) {
  if (curve.spherical)
    fail(ErrorCode::InvalidArgument, "cylinder directrix must be a planar curve");

  // Re-check simplicity on an arclength resampling of the final curve.
  {
    const int m = 512;
    std::vector<Vec3> pts;
    pts.reserve(m);
    for (int k = 0; k < m; ++k) pts.push_back(curve.point(curve.length * Real(k) / Real(m)));
    if (polygon_self_intersects(pts))
      fail(ErrorCode::SelfIntersection, "cylinder directrix intersects itself");
  }

  // A closed simple curve turns by exactly 2π; positively oriented means +2π.
  const Rule1D rule = periodic_trapezoid(1024, curve.length);
  const Real turning = rule.integrate([&](Real t) { return curve.curvature(t); });
  if (std::abs(turning + 2 * kPi) < 0.05 * 2 * kPi)
    fail(ErrorCode::InvalidArgument,
         "cylinder directrix is negatively oriented (total turning -2pi)");
  if (std::abs(turning - 2 * kPi) > 0.05 * 2 * kPi) {
    std::ostringstream os;
    os << "total turning " << turning << " is not 2pi; directrix does not close";
    fail(ErrorCode::NonClosed, os.str());
  }

  const Profile1D B = make_profile(s1_poly({0.0, 1.0}));
  const Profile1D a = constant_profile(0.0, curve.length);
  const Profile1D b = constant_profile(1.0, curve.length);
  return build_surface(B, a, b, curve.curvature, curve.length, z_range,
                       std::make_shared<CylinderEmbedding>(curve));
}

ZeroGaussSurface cone_from_curve(const ArcCurve& curve, Interval z_range) {
  if (!curve.spherical)
    fail(ErrorCode::InvalidArgument, "cone directrix must be a spherical curve");
  if (z_range.lo <= 0 && z_range.hi >= 0)
    fail(ErrorCode::ApexIncluded, "cone z_range must exclude the apex z = 0");

  const Profile1D B = make_profile(s1_poly({0.0, 1.0}));
  const Profile1D a = constant_profile(1.0, curve.length);
  const Profile1D b = constant_profile(0.0, curve.length);
  return build_surface(B, a, b, curve.curvature, curve.length, z_range,
                       std::make_shared<ConeEmbedding>(curve));
}

MetricPoint metric_at(const ZeroGaussSurface& s, Real theta, Real z) {
  if (!s.z_range.contains(z)) {
    std::ostringstream os;
    os << "z = " << z << " outside [" << s.z_range.lo << ", " << s.z_range.hi << "]";
    fail(ErrorCode::OutOfDomain, os.str());
  }
  const Real w = s.wrap_theta(theta);
  const Real at = s.a(w) * s.B(z) + s.b(w);
  return MetricPoint{s.B.deriv(z), at, s.c(w) / at};
}

EmbeddedPoint embed_point(const ZeroGaussSurface& s, Real t, Real theta, Real z) {
  if (!s.embedding)
    fail(ErrorCode::NoEmbedding, "surface built from profiles alone has no embedding");
  const Real w = s.wrap_theta(theta);
  EmbeddedPoint out;
  out.frame = s.embedding->frame(w, z);
  out.point = s.embedding->mid(w, z) + t * out.frame.e_t;
  return out;
}

// ---------------------------------------------------------------------------
// Compatibility residual
// ---------------------------------------------------------------------------

namespace {

// Fourth-order five-point first derivative; step chosen so that truncation
// sits far below the roundoff floor of the difference quotient.
constexpr Real kFdStep = 1e-4;

template <typename F>
Real fd_derivative(const F& f, Real x) {
  return (-f(x + 2 * kFdStep) + 8 * f(x + kFdStep) - 8 * f(x - kFdStep) + f(x - 2 * kFdStep)) /
         (12 * kFdStep);
}

}  // namespace

CodazziGaussResidual codazzi_gauss_residual(const ZeroGaussSurface& s, int n_samples) {
  if (n_samples < 2) fail(ErrorCode::InvalidArgument, "need at least 2 samples per direction");

  Real r_codazzi = 0.0, r_gauss = 0.0;
  const Real len = s.z_range.length();

  for (int i = 0; i < n_samples; ++i) {
    // Stay off spline knots and z-endpoints so one-sided effects cannot hide
    // or inflate the residual.
    const Real theta = s.p * (Real(i) + 0.3) / Real(n_samples);
    const Real a_v = s.a(theta), b_v = s.b(theta), c_v = s.c(theta);

    for (int j = 0; j < n_samples; ++j) {
      const Real z = s.z_range.lo + len * (Real(j) + 0.5) / Real(n_samples);
      const Real Bz = s.B(z), dB = s.B.deriv(z);
      const Real A_th = a_v * Bz + b_v;

      // ∂κ_θ/∂z + κ_θ A_{θ,z}/A_θ = 0 (κ_z = 0).  The outer derivative is a
      // finite difference of the declared κ_θ; the inner A_{θ,z} = a B' is
      // analytic.
      const Real dkth_dz = fd_derivative([&](Real zz) { return c_v / (a_v * s.B(zz) + b_v); }, z);
      r_codazzi = std::max(r_codazzi, std::abs(dkth_dz + (c_v / A_th) * (a_v * dB / A_th)));

      // ∂κ_z/∂θ − κ_θ A_{z,θ}/A_z = 0 holds with both factors identically
      // zero in this family (κ_z = 0, A_z independent of θ); nothing to sample.

      // ∂_z(A_{θ,z}/A_z) + ∂_θ(A_{z,θ}/A_θ) = 0: the first ratio is a(θ)
      // identically, the second vanishes; both outer derivatives are taken
      // literally as finite differences of the declared data.
      const Real g1 = fd_derivative(
          [&](Real zz) { return a_v * s.B.deriv(zz) / s.B.deriv(zz); }, z);
      const Real g2 = fd_derivative([&](Real) { return 0.0; }, theta);
      r_gauss = std::max(r_gauss, std::abs(g1 + g2));

      if (s.embedding) {
        // Declared-vs-embedded discrepancies: the directrix sampling error is
        // visible here even when the abstract identities hold exactly.
        const Real kth_emb =
            s.embedding->curvature(theta) / s.embedding->metric_theta(theta, z);
        r_codazzi = std::max(r_codazzi, std::abs(c_v / A_th - kth_emb));
        r_gauss = std::max(r_gauss,
                           std::abs(A_th - s.embedding->metric_theta(theta, z)));
        r_gauss =
            std::max(r_gauss, std::abs(dB - s.embedding->metric_z(theta, z)));
      }
    }
  }
  return CodazziGaussResidual{r_codazzi, r_gauss};
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

ZeroGaussSurface preset_cylinder_circular(Real radius, Real length) {
  return cylinder_from_curve(circle_curve(radius), Interval{0.0, length});
}

ZeroGaussSurface preset_cylinder_ellipse(Real ax, Real ay, int n_samples, Real length) {
  return cylinder_from_curve(ellipse_curve(ax, ay, n_samples), Interval{0.0, length});
}

ZeroGaussSurface preset_cone_circle(Real colatitude, Real z_min, Real z_max) {
  return cone_from_curve(spherical_circle_curve(colatitude), Interval{z_min, z_max});
}

ZeroGaussSurface preset_cylinder_flat_patch(Real length) {
  return cylinder_from_curve(flat_segment_curve(), Interval{0.0, length});
}

}  // namespace kslab
