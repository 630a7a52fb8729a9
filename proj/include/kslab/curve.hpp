#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "kslab/profile.hpp"
#include "kslab/smooth.hpp"
#include "kslab/types.hpp"

namespace kslab {

// Raw closed-curve samples, as read from a curve file.  Planar rows carry two
// coordinates (z stored as 0); spherical rows carry three and must lie on the
// unit sphere in the northern hemisphere.  The curve is implicitly closed:
// the last sample joins the first.
struct CurveSamples {
  bool spherical = false;
  std::vector<Vec3> points;
};

// Parse the curve ingestion format: a header line `planar N` or `spherical N`
// followed by N whitespace-separated coordinate rows.  Malformed input is
// rejected with a ParseError naming the offending line of `source_name`.
CurveSamples parse_curve_samples(std::istream& in, const std::string& source_name);
CurveSamples read_curve_file(const std::string& path);

// A closed curve parametrized by arclength theta in [0, p).  `component` holds
// the coordinates of Gamma(theta) (planar; third component identically zero)
// or sigma(theta) (spherical) with derivatives in theta.  `curvature` is the
// profile c(theta) consumed by surface construction: the signed planar
// curvature for cylinders, the triple product (sigma, sigma', sigma'') for
// cones.  Both are p-periodic.
struct ArcCurve {
  bool spherical = false;
  Real length = 0.0;  // p
  std::array<Smooth1Ptr, 3> component;
  Profile1D curvature;
  std::vector<Real> collocation;  // arclength of each input sample; empty for closed forms

  Vec3 point(Real theta) const;
  Vec3 tangent(Real theta) const;  // d Gamma / d theta, unit at collocation points
  Vec3 second(Real theta) const;   // d^2 Gamma / d theta^2
};

// Reparametrize a sampled closed curve by arclength.
//
// Pipeline: periodic cubic splines through the samples in the uniform sample
// parameter; node arclengths by per-interval trapezoid sums with endpoint-
// derivative correction (the corrections telescope, so the total length is the
// plain periodic trapezoid value); inversion by a monotone cubic Hermite
// interpolant whose node slopes are the exact reciprocal speeds, which makes
// |Gamma'| = 1 exact at every collocation point.  Node curvatures are
// estimated from the raw samples with fourth-order difference stencils and
// interpolated by a periodic spline - a route independent of the embedding
// splines, so curvature cross-checks measure genuine reconstruction error.
//
// Errors: SelfIntersection (crossing segments, planar), NonClosed (the
// implicit closing segment is far longer than the sample spacing),
// InvalidArgument (too few samples; spherical samples off the unit sphere or
// outside the northern hemisphere).
ArcCurve make_arc_curve(const CurveSamples& samples);

// Closed-form curves.
ArcCurve circle_curve(Real radius);
ArcCurve spherical_circle_curve(Real colatitude);  // northern cap circle
ArcCurve ellipse_curve(Real ax, Real ay, int n_samples);  // sampled + reparametrized

// Convex closed curve containing two straight segments, used to study shells
// whose circumferential curvature vanishes on an open set.  The curvature has
// period p/2 with p = 2 pi + 2: it is 0 on [0, 1] and 2 sin^2(theta - 1) on
// [1, pi + 1].  Each half-period turns the tangent by exactly pi, so the two
// congruent halves close the curve.  flat_segment_arc() is the first straight
// segment in arclength coordinates.
ArcCurve flat_segment_curve();
Interval flat_segment_arc();

// max over n uniformly spaced theta of | |Gamma'(theta)| - 1 |.
Real unit_speed_defect(const ArcCurve& curve, int n);

// True if two non-adjacent edges of the closed polygon through pts (x-y
// components only) cross each other.
bool polygon_self_intersects(const std::vector<Vec3>& pts);

}  // namespace kslab
