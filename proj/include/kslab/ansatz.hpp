#pragma once

#include "kslab/operators.hpp"
#include "kslab/surface.hpp"

namespace kslab {

// How a trial field was constructed.
enum class AnsatzCase {
  Plate,          // Cartesian bending ansatz on a flat plate
  Separable,      // metric ratio A_z/A_theta splits as H(theta)/G(z)
  Nonseparable,   // windowed construction through the profile ratio b/a
};

// Displacement affine in the thickness variable, u = v(theta,z) + t*w(theta,z),
// bundled with the generator data used to build it.
struct AnsatzField {
  DisplacementField field;
  AnsatzCase kind = AnsatzCase::Separable;
  Real h = 0.0;
  Smooth2Ptr phi;            // scalar generator actually substituted
  int n_osc = 1;             // oscillation index when phi came from oscillating_phi
  Smooth1Ptr sep_H, sep_G;   // separable metric factors (Separable only)
  Smooth1Ptr profile_ratio;  // rho = b/a (Nonseparable only)
};

// Scalar generator with its oscillation index n(h).
struct OscillatingPhi {
  Smooth2Ptr phi;
  int n = 1;
};

// Integer part of h^(-1/4), at least 1.  Accepts 0 < h <= 1, else
// InvalidArgument.
int oscillation_index(Real h);

// phi(theta, z) = Phi(n(h)*theta, z), optionally multiplied by a cutoff eta;
// n(h) = oscillation_index(h).
OscillatingPhi oscillating_phi(Smooth2Ptr Phi, Real h, Smooth2Ptr eta = nullptr);

// cos(2*pi*theta/p) * sin^2(pi*(z - lo)/length): p-periodic, non-constant,
// vanishing with its z-derivative at both ends of z_range.
Smooth2Ptr default_oscillation_profile(Real p, Interval z_range);

// Plate bending field on Omega x (-h/2, h/2) in (t, x1, x2) ordering:
// u_t = phi, u_x1 = -t*phi_{,x1}, u_x2 = -t*phi_{,x2}.
AnsatzField kirchhoff_field(Smooth2Ptr phi, Real h);

// Plate energies of the bending field, by two independent routes: the membrane
// and bending contents P = int |grad phi|^2 and D = int |grad grad phi|^2 from
// phi itself, and the raw Frobenius integrals of the assembled gradient.  The
// thickness-averaged pair counts the in-plane rotation energy once:
//   sym_sq  = raw_sym_sq / h                     = h^2/12 * D,
//   grad_sq = (raw_grad_sq + raw_sym_sq) / (2h)  = P + h^2/12 * D.
struct KirchhoffEnergies {
  Real p_sq = 0.0;
  Real d_sq = 0.0;
  Real raw_grad_sq = 0.0;
  Real raw_sym_sq = 0.0;
  Real grad_sq = 0.0;
  Real sym_sq = 0.0;
  Real quotient = 0.0;  // sym_sq / grad_sq
};
KirchhoffEnergies kirchhoff_energies(const Smooth2Ptr& phi, Real h, Interval x1,
                                     Interval x2, int nodes_per_panel = 8,
                                     int panels = 8);

// Shell trial field for surfaces whose metric ratio separates: v_z and v_theta
// from the separable general solution, v_t and w from the membrane system.
// Throws NotSeparable when a and b are linearly independent; evaluating v_t
// where the curvature coefficient c vanishes throws ZeroCurvature.
AnsatzField separable_field(const ZeroGaussSurface& s, Smooth2Ptr phi, Real h);
AnsatzField separable_field(const ZeroGaussSurface& s, const OscillatingPhi& phi,
                            Real h);

// Shell trial field through the profile ratio rho = b/a on a theta-window
// where a and rho' stay away from zero; phi must vanish outside
// theta_window x z_range.  Throws DegenerateProfileRatio or SupportViolation.
AnsatzField nonseparable_field(const ZeroGaussSurface& s, Smooth2Ptr phi, Real h,
                               Interval theta_window);
AnsatzField nonseparable_field(const ZeroGaussSurface& s, const OscillatingPhi& phi,
                               Real h, Interval theta_window);

// Largest mid-surface symmetric simplified strain component other than zz,
// over an n x n sample grid.  Zero (to rounding) certifies a membrane-free
// trial field.
Real membrane_residual(const ZeroGaussSurface& s, const AnsatzField& f,
                       int n_samples = 128);

}  // namespace kslab
