#pragma once

// Zero-Gaussian-curvature shell mid-surfaces.
//
// A surface in this family is described by four profiles: B(z) and the
// p-periodic a(θ), b(θ), c(θ).  The metric coefficients and normal curvatures
// of the mid-surface are then
//
//   A_z = B'(z),   A_θ = a(θ) B(z) + b(θ),   κ_θ = c(θ)/A_θ,   κ_z = 0,
//
// and the compatibility relations between metric and curvature hold
// identically.  Cylinders (B = z, a = 0, b = 1) and cones (B = z, a = 1,
// b = 0) additionally carry a concrete 3D embedding built from a closed
// directrix curve.

#include <memory>
#include <optional>
#include <string>

#include "kslab/curve.hpp"
#include "kslab/profile.hpp"
#include "kslab/types.hpp"

namespace kslab {

// Orthonormal, right-handed local frame at a shell point.  e_t is the outward
// unit normal of the mid-surface; e_theta and e_z are the unit tangents of the
// θ- and z-coordinate lines.
struct Frame {
  Vec3 e_t;
  Vec3 e_theta;
  Vec3 e_z;
};

// Concrete 3D realization of a surface.  mid() is the mid-surface position
// r(θ,z); metric_theta/metric_z are |∂r/∂θ| and |∂r/∂z| measured on the
// embedded surface, and curvature() is the c(θ) value recovered from curve
// derivatives — both are compared against the declared profiles by
// codazzi_gauss_residual.
class Embedding {
 public:
  virtual ~Embedding() = default;

  virtual Vec3 mid(Real theta, Real z) const = 0;
  virtual Frame frame(Real theta, Real z) const = 0;
  virtual Real metric_theta(Real theta, Real z) const = 0;
  virtual Real metric_z(Real theta, Real z) const = 0;
  virtual Real curvature(Real theta) const = 0;
};

// Cylinder over a closed planar directrix: r(θ,z) = (Γ(θ), z).
class CylinderEmbedding final : public Embedding {
 public:
  explicit CylinderEmbedding(ArcCurve curve);

  Vec3 mid(Real theta, Real z) const override;
  Frame frame(Real theta, Real z) const override;
  Real metric_theta(Real theta, Real z) const override;
  Real metric_z(Real theta, Real z) const override;
  Real curvature(Real theta) const override;

  const ArcCurve& curve() const { return curve_; }

 private:
  ArcCurve curve_;
};

// Cone over a closed spherical directrix: r(θ,z) = z σ(θ).
class ConeEmbedding final : public Embedding {
 public:
  explicit ConeEmbedding(ArcCurve curve);

  Vec3 mid(Real theta, Real z) const override;
  Frame frame(Real theta, Real z) const override;
  Real metric_theta(Real theta, Real z) const override;
  Real metric_z(Real theta, Real z) const override;
  Real curvature(Real theta) const override;

  const ArcCurve& curve() const { return curve_; }

 private:
  ArcCurve curve_;
};

struct ZeroGaussSurface {
  Profile1D B;  // z-profile; A_z = B'
  Profile1D a;  // θ-profiles with period p
  Profile1D b;
  Profile1D c;
  Real p = 0;          // θ-period in arclength units
  Interval z_range{};  // [L−, L+]
  bool uniformly_convex = false;
  std::shared_ptr<const Embedding> embedding;  // null for abstract surfaces

  Real wrap_theta(Real theta) const;
  Real A_z(Real z) const;
  Real A_theta(Real theta, Real z) const;
  Real kappa_theta(Real theta, Real z) const;
};

// Metric data of the mid-surface at one point (κ_z is identically zero and
// not reported).
struct MetricPoint {
  Real A_z;
  Real A_theta;
  Real kappa_theta;
};

struct EmbeddedPoint {
  Vec3 point;
  Frame frame;
};

struct CodazziGaussResidual {
  Real r_codazzi;
  Real r_gauss;
};

// Validates the four profiles (finiteness, derivative consistency,
// θ-periodicity with period p), checks strict positivity of A_z and A_θ on a
// validation grid, and sets uniformly_convex from the sampled minimum of c.
//
// Errors: PositivityViolation if A_z or A_θ ≤ 0 at a validation node;
// NonPeriodic if a, b, or c is not p-periodic; InvalidArgument for degenerate
// inputs (p ≤ 0, empty z_range, inconsistent profile derivatives).
ZeroGaussSurface build_surface(const Profile1D& B, const Profile1D& a, const Profile1D& b,
                               const Profile1D& c, Real p, Interval z_range,
                               std::shared_ptr<const Embedding> embedding = nullptr,
                               int n_theta_validation = 256, int n_z_validation = 64);

// Cylinder over a closed planar curve: B = z, a = 0, b = 1, c = planar
// curvature of the directrix, embedding populated.  The directrix must be a
// simple, closed, positively oriented unit-speed curve; this is re-checked
// here (SelfIntersection on a resampled polygon test, NonClosed if the total
// turning is not 2π).
ZeroGaussSurface cylinder_from_curve(const ArcCurve& curve, Interval z_range = {0.0, 1.0});

// Cone over a closed unit-speed curve on the northern unit hemisphere:
// B = z, a = 1, b = 0, c = (σ, σ', σ'').  Errors: ApexIncluded if z_range
// contains 0; InvalidArgument if the curve is not spherical.
ZeroGaussSurface cone_from_curve(const ArcCurve& curve, Interval z_range);

// Metric coefficients and curvature at (θ, z); θ is wrapped modulo p, z must
// lie in z_range (OutOfDomain otherwise).
MetricPoint metric_at(const ZeroGaussSurface& s, Real theta, Real z);

// Point x = r(θ,z) + t·e_t and local frame of the embedded shell.  Errors:
// NoEmbedding for abstract surfaces.
EmbeddedPoint embed_point(const ZeroGaussSurface& s, Real t, Real theta, Real z);

// Maximum absolute residuals of the two compatibility relations
//
//   ∂κ_z/∂θ = (κ_θ − κ_z) A_{z,θ}/A_z,
//   ∂κ_θ/∂z = (κ_z − κ_θ) A_{θ,z}/A_θ,
//   ∂_z(A_{θ,z}/A_z) + ∂_θ(A_{z,θ}/A_θ) = −A_z A_θ κ_z κ_θ
//
// over an n_samples × n_samples (θ, z) grid, with κ_z = 0 substituted.  The
// outer derivatives are formed by high-order finite differences of the
// declared metric functions; inner derivatives use the profile derivatives.
// When the surface carries an embedding, the declared κ_θ, A_θ, A_z are
// additionally compared against their embedded counterparts: the curvature
// discrepancy enters r_codazzi and the metric discrepancies enter r_gauss,
// so sampling error of a directrix spline is visible in the residual instead
// of cancelling out of the identities.
CodazziGaussResidual codazzi_gauss_residual(const ZeroGaussSurface& s, int n_samples);

// ---------------------------------------------------------------------------
// Ready-made surfaces
// ---------------------------------------------------------------------------

// Circular cylinder of radius R: p = 2πR, z ∈ [0, length], κ_θ = 1/R.
ZeroGaussSurface preset_cylinder_circular(Real radius, Real length);

// Elliptic cylinder with semi-axes (ax, ay), directrix sampled at n points.
ZeroGaussSurface preset_cylinder_ellipse(Real ax, Real ay, int n_samples, Real length);

// Cone over the spherical circle at the given colatitude, z ∈ [z_min, z_max].
ZeroGaussSurface preset_cone_circle(Real colatitude, Real z_min, Real z_max);

// Convex cylinder whose directrix contains a genuinely flat piece; the flat
// θ-arc is flat_segment_arc().  uniformly_convex is false.
ZeroGaussSurface preset_cylinder_flat_patch(Real length);

}  // namespace kslab
