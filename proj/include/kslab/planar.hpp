#pragma once

// Two-dimensional Korn-type machinery on the strip R_h = (-h/2, h/2) x (0, p):
// the coefficient-weighted gradient pair, the first-and-a-half ratio in its
// two boundary flavors, discrete harmonic extension on the strip, and the
// sharp inequality for harmonic functions with constant 2*sqrt(3).
//
// Conventions: x is the thickness variable (first argument of the scalar
// fields), y runs along the strip.  All norms are plain unweighted L2 norms
// over R_h.

#include <cstdint>

#include "kslab/quadrature.hpp"
#include "kslab/smooth.hpp"
#include "kslab/types.hpp"

namespace kslab {

// Which edge behavior a planar field declares.
enum class PlanarVariant {
  PeriodicU,   // u(x, 0) = u(x, p): the first component is p-periodic in y
  DirichletV,  // v(x, 0) = 0: the second component vanishes on the lower edge
};

struct PlanarField {
  Smooth2Ptr u;
  Smooth2Ptr v;
  PlanarVariant variant = PlanarVariant::PeriodicU;
};

// Lipschitz coefficient functions of y entering the weighted gradient; a1 and
// a2 must not vanish on [0, p].
struct PlanarCoeffs {
  Smooth1Ptr a1, b1, a2, b2;
};

// a1 = a2 = 1, b1 = b2 = 0: the plain Cartesian gradient.
PlanarCoeffs unit_planar_coeffs();

// The shell cross-section specialization (a1, b1, a2, b2) =
// (alpha, -kappa, alpha, kappa).
PlanarCoeffs cross_section_coeffs(Smooth1Ptr alpha, Smooth1Ptr kappa);

// Tensor-product Gauss panels used for all planar quadratures.
struct PlanarQuadrature {
  int nx_nodes = 6;
  int nx_panels = 8;
  int ny_nodes = 6;
  int ny_panels = 16;
};

// Pointwise weighted gradient
//   G = [[u_x, a1(y) u_y + b1(y) v], [v_x, a2(y) v_y + b2(y) u]].
Mat2 planar_gradient(const PlanarField& f, const PlanarCoeffs& c, Real x, Real y);

struct PlanarForms {
  Real grad_sq = 0;  // ||G||^2
  Real sym_sq = 0;   // ||E||^2 with E = (G + G^T)/2
  Real u_sq = 0;     // ||u||^2
  Real v_sq = 0;     // ||v||^2; ||phi||^2 = u_sq + v_sq
};

// Quadrature of the weighted form norms over R_h.  Errors: CoeffVanishes if
// a1 or a2 vanishes (or changes sign between samples) on [0, p];
// InvalidArgument for non-positive h or p.
PlanarForms planar_forms(const PlanarField& f, const PlanarCoeffs& c, Real h, Real p,
                         const PlanarQuadrature& q = {});

// First-and-a-half ratio of the field.
//   PeriodicU:   ||G||^2 / (||u|| ||E|| / h + ||E||^2 + ||phi||^2)
//                with the coefficient-weighted forms;
//   DirichletV:  ||grad phi||^2 / (||E|| (||u|| / h + ||E||))
//                with the plain Cartesian forms (coefficients do not enter).
// Errors: VariantViolation if the declared edge condition fails at sampled
// boundary points (1e-10 relative to the field scale); ZeroDenominator if the
// denominator vanishes (identically zero field); CoeffVanishes as above.
Real korn15_ratio(const PlanarField& f, const PlanarCoeffs& c, Real h, Real p,
                  const PlanarQuadrature& q = {});

// Uniform node grid over [-h/2, h/2] x [0, p]; w(i, j) lives at
// (x_i = -h/2 + i h/nx, y_j = j p/ny), i = 0..nx, j = 0..ny.
struct PlanarGrid {
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> w;
  Real h = 0, p = 0;

  Real x(int i) const { return -h / 2 + i * h / Real(w.rows() - 1); }
  Real y(int j) const { return j * p / Real(w.cols() - 1); }
};

// Discrete harmonic extension: keeps the boundary samples of g and replaces
// interior values by the solution of the 5-point Laplace equation, solved
// matrix-free by conjugate gradients to relative residual 1e-10.
// max_iterations = 0 picks a budget proportional to the number of unknowns.
// Errors: NonConvergence if the budget is exhausted; InvalidArgument for
// nx or ny < 2, non-positive h or p, or non-finite boundary data.
PlanarGrid harmonic_extension(const Smooth2Ptr& g, Real h, Real p, int nx, int ny,
                              int max_iterations = 0);

// Maximum absolute 5-point Laplacian residual of the grid over interior
// nodes (diagnostic companion of harmonic_extension).
Real laplace_residual(const PlanarGrid& grid);

// Gap of the sharp harmonic inequality
//   ||w_y||^2 <= (2 sqrt(3) / h) ||w|| ||w_x|| + ||w_x||^2,
// evaluated by quadrature; gap = RHS - LHS, so gap >= 0 certifies the
// instance.  Errors: NotHarmonic if |w_xx + w_yy| exceeds 1e-8 relative to
// the local second-derivative scale at a sample point; InvalidArgument if
// none of the admissible edge conditions (w p-periodic in y, w = 0 at y = 0,
// or w = 0 at y = p) holds at sampled points.
Real harmonic_gap(const Smooth2Ptr& w, Real h, Real p, const PlanarQuadrature& q = {});

// Seeded random admissible field: truncated Fourier modes in y times
// low-degree polynomials in x, coefficients drawn uniformly from [-1, 1].
// For DirichletV the v component uses only sin modes (vanishing at y = 0);
// for PeriodicU the u component uses only full-period harmonics.
PlanarField random_planar_field(std::uint64_t seed, PlanarVariant variant, Real p,
                                int n_modes = 4, int degree = 3);

}  // namespace kslab
