#pragma once

// Discretization of the shell energy forms and the Korn constant as a
// generalized eigenvalue.
//
// The displacement space is a tensor-product nodal space: Lagrange polynomials
// through the Gauss points of the thickness interval (degree n_t - 1, linear
// for the default n_t = 2), periodic piecewise-linear hats in theta, and
// piecewise-linear hats in z, one copy per frame component.  Both energy
// matrices are quadratures of gradient-component products over the same cell
// rule, so the pointwise domination |sym M| <= |M| transfers verbatim to the
// assembled forms.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "kslab/operators.hpp"
#include "kslab/surface.hpp"

namespace kslab {

// Tensor-product grid over I_h x [0,p) x z_range with the A_z A_theta measure
// baked into the quadrature weights.  theta cells are [theta_j, theta_{j+1}]
// with the last one wrapping to the period; z cells connect consecutive
// z-nodes; in t a single spectral element carries n_t Gauss nodes.
struct Grid3 {
  Real h = 0;
  Real p = 0;
  Interval z_range{0, 0};
  int n_t = 0;      // t-nodes (Gauss points of I_h)
  int n_theta = 0;  // theta-nodes, uniform spacing p / n_theta
  int n_z = 0;      // z-nodes, uniform on z_range (n_z - 1 cells)

  Eigen::VectorXd t_nodes, t_weights;
  Eigen::VectorXd theta_nodes;                   // j * p / n_theta
  Eigen::VectorXd z_nodes;                       // uniform on z_range
  Eigen::VectorXd qtheta_nodes, qtheta_weights;  // 2 per theta-cell
  Eigen::VectorXd qz_nodes, qz_weights;          // 2 per z-cell
  // measure(iq, jq) = A_z(z_q) * A_theta(theta_q, z_q) at the cell quadrature
  // points; t-independent because the surfaces carry no z-curvature.
  Eigen::MatrixXd measure;

  // Sum of all quadrature weights = integral of A_z A_theta over the shell.
  Real weight_sum() const;
};

// Nodes and composite weights for the given resolution.  Requires n_t >= 2,
// n_theta >= 8, n_z >= 3 (ResolutionTooLow otherwise) and a shell thin enough
// for its curvature: h * max|c| < min A_theta (DegenerateMetric otherwise).
// Deterministic.
Grid3 make_grid(const ZeroGaussSurface& s, Real h, int n_t, int n_theta, int n_z);

// Map from node coordinates to free-DOF column indices.  Under V1/V2 the
// theta direction is periodic: n_theta_cols = n_theta.  Under V3 the theta
// edges are distinct boundary lines: n_theta_cols = n_theta + 1, u_theta is
// constrained on both edge columns, and the V2 z-end data is kept (without it
// the constant axial translation would make the full-gradient form singular
// on cylinders).  V1 constrains all three components at the lower z-end and
// (u_t, u_theta) at the upper; V2 constrains (u_theta, u_z) at both z-ends;
// PeriodicOnly constrains nothing.
struct DofMap {
  static constexpr int kConstrained = -1;

  int n_t = 0, n_theta_cols = 0, n_z = 0;
  BcTag bc = BcTag::PeriodicOnly;
  Eigen::VectorXi index_map;  // flat (comp, i_t, j_theta, k_z) -> column
  int n_free = 0;

  int flat(int comp, int i_t, int j_theta, int k_z) const {
    return ((comp * n_t + i_t) * n_theta_cols + j_theta) * n_z + k_z;
  }
  // Column index of the node, or kConstrained.
  int index(int comp, int i_t, int j_theta, int k_z) const;
};

DofMap make_dof_map(const Grid3& grid, BcTag bc);

struct FormPairMeta {
  std::string surface_label;  // free-form caller tag, not interpreted
  Real h = 0;
  int n_t = 0, n_theta = 0, n_z = 0;
  GradientKind kind = GradientKind::Full;
  BcTag bc = BcTag::PeriodicOnly;
};

// The two assembled quadratic forms on the free DOFs: x' a_e x integrates
// |sym grad u|^2 and x' a_g x integrates |grad u|^2, both against the
// A_z A_theta measure.  Symmetric by construction; they share one sparsity
// pattern; 0 <= x' a_e x <= x' a_g x for every x.
struct FormPair {
  Eigen::SparseMatrix<Real> a_e;
  Eigen::SparseMatrix<Real> a_g;
  DofMap dofs;
  FormPairMeta meta;
};

// Assembles both forms with trilinear elements and a 2x2x2 Gauss rule per
// cell (n_t x 2 x 2 for n_t > 2).  Elements are processed in cell order with
// an ordered reduction, so the result is bitwise identical for any n_threads.
// Errors: InvalidArgument if h disagrees with grid.h; DegenerateMetric if the
// exact theta-denominator A_theta + t c reaches zero at a quadrature point.
FormPair assemble_forms(const ZeroGaussSurface& s, const Grid3& grid, Real h, BcTag bc,
                        GradientKind kind, int n_threads = 1);

// Nodal values of the field on the free DOFs (constrained nodes are dropped;
// for admissible fields they vanish anyway).  The quotient of the result
// through the matching FormPair is a discrete upper bound for the smallest
// generalized eigenvalue.
Eigen::VectorXd interpolate_field(const ZeroGaussSurface& s, const Grid3& grid,
                                  const DofMap& dofs, const DisplacementField& u);

// (x' a_e x) / (x' a_g x).  Errors: ZeroDenominator if the denominator is not
// strictly positive.
Real form_quotient(const FormPair& fp, const Eigen::VectorXd& x);

struct EigResult {
  Real lambda = 0;
  Eigen::VectorXd vector;  // minimizer DOFs, normalized x' a_g x = 1
  int iterations = 0;
  Real residual = 0;   // |a_e x - lambda a_g x| / |a_g x|
  Real wall_time = 0;  // seconds
  std::uint64_t seed = 0;
  std::vector<Real> quotient_history;  // one Rayleigh quotient per iteration
};

// Smallest generalized eigenvalue of (a_e, a_g) by preconditioned Rayleigh
// quotient minimization over span{x, preconditioned residual, previous
// direction} (locally optimal style; the subspace solve keeps the quotient
// nonincreasing).  Converges when the relative quotient change and the
// relative residual both drop below tol.  Deterministic for a fixed seed.
// Errors: NotPD if a_g fails its factorization probe; NonConvergence after
// maxit iterations.
EigResult min_generalized_eig(const FormPair& fp, Real tol = 1e-8, int maxit = 500,
                              std::uint64_t seed = 1234);

// Grid resolution used by korn_constant; n_theta = 0 selects
// max(64, 40 * ceil(3.5 h^{-1/4})).  The minimizing field oscillates with a
// wavenumber near 3.5 h^{-1/4} on uniformly convex shells, and about forty
// linear elements per wavelength keep the eigenvalue's discretization bias
// small against its h-scaling.
struct ResolutionPolicy {
  int n_t = 2;
  int n_theta = 0;
  int n_z = 64;
};

// The discrete Korn constant: smallest eigenvalue of the assembled pair on
// the bc subspace.  bc must be V1, V2, or V3; PeriodicOnly admits rigid
// motions in the kernel of the full form and is rejected (InvalidArgument).
EigResult korn_constant(const ZeroGaussSurface& s, Real h, BcTag bc,
                        const ResolutionPolicy& policy = {},
                        GradientKind kind = GradientKind::Full, Real tol = 1e-8,
                        int maxit = 500, std::uint64_t seed = 1234);

// Binary container for offline cross-checks: header (magic "KSLF", version,
// dimensions and meta), then coordinate-format triplets (row, col, value) per
// matrix; all integers little-endian 64-bit, values IEEE doubles.  The DofMap
// is not serialized.  Errors: IoFailure on unwritable/unreadable paths,
// ParseError on a malformed file.
void write_form_pair(const FormPair& fp, const std::string& path);

struct FormPairFile {
  Eigen::SparseMatrix<Real> a_e;
  Eigen::SparseMatrix<Real> a_g;
  FormPairMeta meta;
  int n_free = 0;
};
FormPairFile read_form_pair(const std::string& path);

}  // namespace kslab
