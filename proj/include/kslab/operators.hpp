#pragma once

// Curvilinear differential operators on shell displacement fields: the exact
// gradient of the thin shell, its thickness-simplified variant, symmetric
// parts, weighted energy norms, and the derived Korn-type quotients.
//
// Conventions: a displacement has frame components (u_t, u_theta, u_z); the
// gradient is the 3x3 matrix of frame components with row = component, col =
// differentiation direction, in the order (t, theta, z).  The exact gradient
// divides theta-derivatives by A_theta + t c(theta); the simplified gradient
// divides by A_theta.  z-derivatives divide by A_z in both (the surfaces here
// have no z-curvature, so no t-correction appears in that column).

#include <vector>

#include "kslab/smooth.hpp"
#include "kslab/surface.hpp"
#include "kslab/types.hpp"

namespace kslab {

// Declared boundary-condition class of a field (which subspace it claims to
// live in).  PeriodicOnly asserts only theta-periodicity.
enum class BcTag { V1, V2, V3, PeriodicOnly };

// One scalar component: a polynomial in the thickness variable t whose
// coefficients are smooth functions of (theta, z).
struct ComponentTZ {
  std::vector<Smooth2Ptr> coeff;  // coeff[k] multiplies t^k

  // d^{dt+dth+dz} f / dt^{dt} dtheta^{dth} dz^{dz}
  Real deriv(int dt, int dth, int dz, Real t, Real theta, Real z) const;
  Real value(Real t, Real theta, Real z) const { return deriv(0, 0, 0, t, theta, z); }
};

ComponentTZ component_tz(Smooth2Ptr c0);
ComponentTZ component_tz(Smooth2Ptr c0, Smooth2Ptr c1);
ComponentTZ zero_component();

struct DisplacementField {
  ComponentTZ u_t;
  ComponentTZ u_theta;
  ComponentTZ u_z;
  BcTag bc = BcTag::PeriodicOnly;
  // Highest theta-wavenumber the field claims to contain (waves per period);
  // quadrature resolution is checked against it.
  int wavenumber = 1;
};

// 3x3 frame tensor, indices ordered (t, theta, z).
using FrameTensor = Mat3;

inline FrameTensor sym_part(const FrameTensor& T) { return 0.5 * (T + T.transpose()); }

enum class GradientKind { Full, Simplified };

// Exact or simplified shell gradient at (t, theta, z).  Errors:
// DegenerateMetric if A_theta + t c <= 0 there (shell thicker than the
// curvature allows).
FrameTensor gradient(const ZeroGaussSurface& s, const DisplacementField& u, Real t,
                     Real theta, Real z, GradientKind kind);

// Quadrature used for energy norms: Gauss in t (exact for the polynomial
// thickness profiles used throughout), trapezoid in theta (spectrally
// accurate for periodic integrands), composite Gauss panels in z.
struct QuadratureSpec {
  int n_t = 4;
  int n_theta = 64;
  int n_z_nodes = 6;
  int n_z_panels = 8;
};

// Squared weighted L2 norms of a field and its gradients over
// I_h x [0,p) x z_range with volume weight A_z A_theta.
struct NormBundle {
  Real grad_full_sq = 0;
  Real sym_full_sq = 0;
  Real grad_simp_sq = 0;
  Real sym_simp_sq = 0;
  Real ut_sq = 0;
  Real utheta_sq = 0;
  Real uz_sq = 0;
  // Set when the theta rule has fewer than 8 nodes per declared wave; the
  // norms are still computed (deliberate under-resolution stays possible).
  bool unresolved_oscillation = false;
};

// Errors: DegenerateMetric if h max|c| >= 2 min A_theta (checked once per
// call); InvalidArgument for h outside (0, 1).
NormBundle energy_norms(const ZeroGaussSurface& s, const DisplacementField& u, Real h,
                        const QuadratureSpec& q);

struct KornFunctionals {
  Real q_full;  // sym_full_sq / grad_full_sq
  Real q_simp;  // sym_simp_sq / grad_simp_sq
  Real r_15;    // grad_simp_sq / (|u_t| |e(u)| / h + |e(u)|^2), e = sym simplified
};

// Errors: ZeroField if either squared gradient norm vanishes.
KornFunctionals korn_functionals(const ZeroGaussSurface& s, const DisplacementField& u,
                                 Real h, const QuadratureSpec& q);

// Frame components of the infinitesimal rigid motion x -> A x + b (A skew) on
// an embedded surface.  The resulting field is exactly in the kernel of the
// symmetrized exact gradient.  Errors: NoEmbedding; InvalidArgument if A is
// not skew.
DisplacementField rigid_motion_field(const ZeroGaussSurface& s, const Mat3& A,
                                     const Vec3& b);

// The six standard generators: translations along the Cartesian axes, then
// rotations about them.
std::vector<DisplacementField> rigid_motion_basis(const ZeroGaussSurface& s);

// Frobenius relative error between gradient(kind=Full) and the
// frame-projected Cartesian Jacobian of the push-forward field, the latter
// formed by central differences of step eps along the coordinate lines
// through embed_point.  The caller owns the choice of eps; the truncation /
// cancellation trade-off is reported, not hidden.  Errors: NoEmbedding.
Real cartesian_consistency(const ZeroGaussSurface& s, const DisplacementField& u, Real t,
                           Real theta, Real z, Real eps);

// Checks the declared subspace conditions of the field on sampled boundary
// points: theta-periodicity of u_theta and u_z (edge clamping of u_theta
// instead, for V3) and the declared z-end values.  Raises InvalidArgument
// naming the first violated condition.
void check_field_bc(const ZeroGaussSurface& s, const DisplacementField& u, Real h,
                    int n_samples = 64);

}  // namespace kslab
