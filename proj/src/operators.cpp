#include "kslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kslab/curve.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

// ---------------------------------------------------------------------------
// Components
// ---------------------------------------------------------------------------

Real ComponentTZ::deriv(int dt, int dth, int dz, Real t, Real theta, Real z) const {
  Real acc = 0.0, tp = 1.0;
  for (int k = dt; k < static_cast<int>(coeff.size()); ++k) {
    Real falling = 1.0;
    for (int j = 0; j < dt; ++j) falling *= Real(k - j);
    acc += falling * tp * coeff[static_cast<std::size_t>(k)]->deriv(dth, dz, theta, z);
    tp *= t;
  }
  return acc;
}

ComponentTZ component_tz(Smooth2Ptr c0) { return ComponentTZ{{std::move(c0)}}; }

ComponentTZ component_tz(Smooth2Ptr c0, Smooth2Ptr c1) {
  return ComponentTZ{{std::move(c0), std::move(c1)}};
}

ComponentTZ zero_component() { return ComponentTZ{{}}; }

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

namespace {

struct Partials {
  Real v, dt, dth, dz;
};

Partials eval_partials(const ComponentTZ& f, Real t, Real theta, Real z) {
  return Partials{f.deriv(0, 0, 0, t, theta, z), f.deriv(1, 0, 0, t, theta, z),
                  f.deriv(0, 1, 0, t, theta, z), f.deriv(0, 0, 1, t, theta, z)};
}

// Assembles the gradient matrix from precomputed partials and the metric data
// at the point; D is the theta-column denominator of the chosen kind.
FrameTensor assemble_gradient(const Partials& ut, const Partials& uth, const Partials& uz,
                              Real a, Real c, Real A_zv, Real D) {
  FrameTensor M;
  M(0, 0) = ut.dt;
  M(0, 1) = (ut.dth - c * uth.v) / D;
  M(0, 2) = ut.dz / A_zv;
  M(1, 0) = uth.dt;
  M(1, 1) = (uth.dth + c * ut.v + a * uz.v) / D;
  M(1, 2) = uth.dz / A_zv;
  M(2, 0) = uz.dt;
  M(2, 1) = (uz.dth - a * uth.v) / D;
  M(2, 2) = uz.dz / A_zv;
  return M;
}

[[noreturn]] void degenerate_metric(Real A_th, Real t, Real c) {
  std::ostringstream os;
  os << "A_theta + t c = " << A_th + t * c << " at t = " << t
     << "; shell too thick for the curvature";
  fail(ErrorCode::DegenerateMetric, os.str());
}

}  // namespace

FrameTensor gradient(const ZeroGaussSurface& s, const DisplacementField& u, Real t,
                     Real theta, Real z, GradientKind kind) {
  const Real w = s.wrap_theta(theta);
  const Real a = s.a(w), c = s.c(w);
  const Real A_th = s.a(w) * s.B(z) + s.b(w);
  const Real A_zv = s.A_z(z);
  const Real D_full = A_th + t * c;
  if (!(D_full > 0)) degenerate_metric(A_th, t, c);
  const Real D = kind == GradientKind::Full ? D_full : A_th;
  return assemble_gradient(eval_partials(u.u_t, t, theta, z),
                           eval_partials(u.u_theta, t, theta, z),
                           eval_partials(u.u_z, t, theta, z), a, c, A_zv, D);
}

// ---------------------------------------------------------------------------
// Energy norms
// ---------------------------------------------------------------------------

NormBundle energy_norms(const ZeroGaussSurface& s, const DisplacementField& u, Real h,
                        const QuadratureSpec& q) {
  if (!(h > 0) || !(h < 1))
    fail(ErrorCode::InvalidArgument, "thickness h must lie in (0, 1)");
  if (q.n_t < 1 || q.n_theta < 4 || q.n_z_nodes < 1 || q.n_z_panels < 1)
    fail(ErrorCode::InvalidArgument, "quadrature spec must have positive node counts");

  // Thickness-curvature compatibility, once per call: the exact denominator
  // A_theta + t c must stay positive across the whole shell.
  Real max_abs_c = 0.0, min_A_th = std::numeric_limits<Real>::max();
  for (int i = 0; i < 256; ++i) {
    const Real theta = s.p * Real(i) / 256.0;
    max_abs_c = std::max(max_abs_c, std::abs(s.c(theta)));
    for (int j = 0; j < 16; ++j) {
      const Real z = s.z_range.lo + s.z_range.length() * Real(j) / 15.0;
      min_A_th = std::min(min_A_th, s.A_theta(theta, z));
    }
  }
  if (h * max_abs_c >= 2 * min_A_th) degenerate_metric(min_A_th, -h / 2, max_abs_c);

  NormBundle out;
  out.unresolved_oscillation = q.n_theta < 8 * std::max(1, u.wavenumber);

  const Rule1D rt = gauss_legendre(q.n_t, -h / 2, h / 2);
  const Rule1D rth = periodic_trapezoid(q.n_theta, s.p);
  const Rule1D rz =
      gauss_legendre_panels(q.n_z_nodes, q.n_z_panels, s.z_range.lo, s.z_range.hi);

  for (std::size_t iz = 0; iz < rz.nodes.size(); ++iz) {
    const Real z = rz.nodes[iz];
    const Real A_zv = s.A_z(z), Bv = s.B(z);
    for (int ith = 0; ith < q.n_theta; ++ith) {
      const Real theta = rth.nodes[static_cast<std::size_t>(ith)];
      const Real a = s.a(theta), c = s.c(theta);
      const Real A_th = a * Bv + s.b(theta);
      const Real w_surf =
          rz.weights[iz] * rth.weights[static_cast<std::size_t>(ith)] * A_zv * A_th;
      for (int it = 0; it < q.n_t; ++it) {
        const Real t = rt.nodes[static_cast<std::size_t>(it)];
        const Real wgt = w_surf * rt.weights[static_cast<std::size_t>(it)];
        const Partials pt = eval_partials(u.u_t, t, theta, z);
        const Partials pth = eval_partials(u.u_theta, t, theta, z);
        const Partials pz = eval_partials(u.u_z, t, theta, z);
        const FrameTensor Gf = assemble_gradient(pt, pth, pz, a, c, A_zv, A_th + t * c);
        const FrameTensor Gs = assemble_gradient(pt, pth, pz, a, c, A_zv, A_th);
        out.grad_full_sq += wgt * Gf.squaredNorm();
        out.sym_full_sq += wgt * sym_part(Gf).squaredNorm();
        out.grad_simp_sq += wgt * Gs.squaredNorm();
        out.sym_simp_sq += wgt * sym_part(Gs).squaredNorm();
        out.ut_sq += wgt * pt.v * pt.v;
        out.utheta_sq += wgt * pth.v * pth.v;
        out.uz_sq += wgt * pz.v * pz.v;
      }
    }
  }
  return out;
}

KornFunctionals korn_functionals(const ZeroGaussSurface& s, const DisplacementField& u,
                                 Real h, const QuadratureSpec& q) {
  const NormBundle n = energy_norms(s, u, h, q);
  if (n.grad_full_sq <= 0 || n.grad_simp_sq <= 0)
    fail(ErrorCode::ZeroField, "gradient norm vanishes; Korn quotients undefined");
  KornFunctionals out;
  out.q_full = n.sym_full_sq / n.grad_full_sq;
  out.q_simp = n.sym_simp_sq / n.grad_simp_sq;
  out.r_15 =
      n.grad_simp_sq / (std::sqrt(n.ut_sq * n.sym_simp_sq) / h + n.sym_simp_sq);
  return out;
}

// ---------------------------------------------------------------------------
// Rigid motions
// ---------------------------------------------------------------------------

namespace {

using Triple = std::array<Smooth1Ptr, 3>;

Smooth1Ptr sub(Smooth1Ptr x, Smooth1Ptr y) {
  return s1_sum(std::move(x), s1_scale(-1.0, std::move(y)));
}

// w x V for a constant vector w and a Smooth1 triple V.
Triple cross_const(const Vec3& w, const Triple& V) {
  return Triple{sub(s1_scale(w.y(), V[2]), s1_scale(w.z(), V[1])),
                sub(s1_scale(w.z(), V[0]), s1_scale(w.x(), V[2])),
                sub(s1_scale(w.x(), V[1]), s1_scale(w.y(), V[0]))};
}

Triple cross(const Triple& A, const Triple& B) {
  return Triple{sub(s1_prod(A[1], B[2]), s1_prod(A[2], B[1])),
                sub(s1_prod(A[2], B[0]), s1_prod(A[0], B[2])),
                sub(s1_prod(A[0], B[1]), s1_prod(A[1], B[0]))};
}

Smooth1Ptr dot(const Triple& A, const Triple& B) {
  return s1_sum(s1_prod(A[0], B[0]), s1_sum(s1_prod(A[1], B[1]), s1_prod(A[2], B[2])));
}

Triple derivative_triple(const Triple& V) {
  return Triple{s1_deriv(V[0]), s1_deriv(V[1]), s1_deriv(V[2])};
}

}  // namespace

DisplacementField rigid_motion_field(const ZeroGaussSurface& s, const Mat3& A,
                                     const Vec3& b) {
  if ((A + A.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max<Real>(1.0, A.cwiseAbs().maxCoeff()))
    fail(ErrorCode::InvalidArgument, "rigid motion matrix must be skew-symmetric");
  if (!s.embedding)
    fail(ErrorCode::NoEmbedding, "rigid motions need an embedded surface");
  const Vec3 omega(A(2, 1), A(0, 2), A(1, 0));

  // Position x = P(theta) + z Q(theta) + t N(theta) and frame triples, per
  // embedding type.
  Triple P, Q, N, E_theta, E_z;
  if (const auto* cyl = dynamic_cast<const CylinderEmbedding*>(s.embedding.get())) {
    const auto& comp = cyl->curve().component;
    const Smooth1Ptr zero = s1_const(0.0), one = s1_const(1.0);
    const Smooth1Ptr dx = s1_deriv(comp[0]), dy = s1_deriv(comp[1]);
    P = Triple{comp[0], comp[1], zero};
    Q = Triple{zero, zero, one};
    N = Triple{dy, s1_scale(-1.0, dx), zero};
    E_theta = Triple{dx, dy, zero};
    E_z = Q;
  } else if (const auto* cone = dynamic_cast<const ConeEmbedding*>(s.embedding.get())) {
    const Triple sigma{cone->curve().component[0], cone->curve().component[1],
                       cone->curve().component[2]};
    const Triple dsigma = derivative_triple(sigma);
    const Smooth1Ptr zero = s1_const(0.0);
    P = Triple{zero, zero, zero};
    Q = sigma;
    N = cross(dsigma, sigma);
    E_theta = dsigma;
    E_z = sigma;
  } else {
    fail(ErrorCode::NoEmbedding, "unsupported embedding type for rigid motions");
  }
  const Triple& E_t = N;

  const Triple wP_b{s1_sum(cross_const(omega, P)[0], s1_const(b.x())),
                    s1_sum(cross_const(omega, P)[1], s1_const(b.y())),
                    s1_sum(cross_const(omega, P)[2], s1_const(b.z()))};
  const Triple wQ = cross_const(omega, Q);
  const Triple wN = cross_const(omega, N);

  const Smooth1Ptr lin_z = s1_poly({0.0, 1.0});
  const auto project = [&](const Triple& E) {
    // (omega x (P + zQ + tN) + b) . E  ->  c0(theta, z) + t c1(theta)
    const Smooth2Ptr c0 =
        s2_sum(s2_from_x(dot(wP_b, E)), s2_sep(dot(wQ, E), lin_z));
    const Smooth2Ptr c1 = s2_from_x(dot(wN, E));
    return component_tz(c0, c1);
  };

  DisplacementField out;
  out.u_t = project(E_t);
  out.u_theta = project(E_theta);
  out.u_z = project(E_z);
  out.bc = BcTag::PeriodicOnly;
  out.wavenumber = 1;
  return out;
}

std::vector<DisplacementField> rigid_motion_basis(const ZeroGaussSurface& s) {
  std::vector<DisplacementField> out;
  out.reserve(6);
  for (int i = 0; i < 3; ++i)
    out.push_back(rigid_motion_field(s, Mat3::Zero(), Vec3::Unit(i)));
  for (int i = 0; i < 3; ++i) {
    Mat3 A = Mat3::Zero();
    const Vec3 w = Vec3::Unit(i);
    A << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    out.push_back(rigid_motion_field(s, A, Vec3::Zero()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation against the embedding
// ---------------------------------------------------------------------------

Real cartesian_consistency(const ZeroGaussSurface& s, const DisplacementField& u, Real t,
                           Real theta, Real z, Real eps) {
  if (!s.embedding)
    fail(ErrorCode::NoEmbedding, "consistency check needs an embedded surface");
  const FrameTensor G = gradient(s, u, t, theta, z, GradientKind::Full);

  // Push-forward vector field at given shell coordinates.
  const auto U_vec = [&](Real tt, Real th, Real zz) -> Vec3 {
    const EmbeddedPoint e = embed_point(s, tt, th, zz);
    return u.u_t.value(tt, th, zz) * e.frame.e_t +
           u.u_theta.value(tt, th, zz) * e.frame.e_theta +
           u.u_z.value(tt, th, zz) * e.frame.e_z;
  };

  const Real w = s.wrap_theta(theta);
  const Real H_theta = s.A_theta(theta, z) + t * s.c(w);
  const Real H_z = s.A_z(z);

  const Vec3 col_t = (U_vec(t + eps, theta, z) - U_vec(t - eps, theta, z)) / (2 * eps);
  const Vec3 col_th =
      (U_vec(t, theta + eps, z) - U_vec(t, theta - eps, z)) / (2 * eps * H_theta);
  const Vec3 col_z = (U_vec(t, theta, z + eps) - U_vec(t, theta, z - eps)) / (2 * eps * H_z);

  const EmbeddedPoint e0 = embed_point(s, t, theta, z);
  Mat3 E;
  E.col(0) = e0.frame.e_t;
  E.col(1) = e0.frame.e_theta;
  E.col(2) = e0.frame.e_z;
  Mat3 J;
  J.col(0) = col_t;
  J.col(1) = col_th;
  J.col(2) = col_z;
  const Mat3 T = E.transpose() * J;

  const Real scale = G.norm();
  return scale > 0 ? (T - G).norm() / scale : (T - G).norm();
}

// ---------------------------------------------------------------------------
// Declared boundary conditions
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bc_violation(const char* what, Real t, Real theta, Real z, Real value) {
  std::ostringstream os;
  os << what << " violated at (t, theta, z) = (" << t << ", " << theta << ", " << z
     << "): value " << value;
  fail(ErrorCode::InvalidArgument, os.str());
}

}  // namespace

void check_field_bc(const ZeroGaussSurface& s, const DisplacementField& u, Real h,
                    int n_samples) {
  constexpr Real kTol = 1e-10;
  const Real t_vals[3] = {-h / 2, 0.0, h / 2};
  const Real L0 = s.z_range.lo, L1 = s.z_range.hi;

  const auto z_at = [&](int j) {
    return L0 + s.z_range.length() * (Real(j) + 0.5) / Real(n_samples);
  };
  const auto th_at = [&](int i) { return s.p * (Real(i) + 0.5) / Real(n_samples); };

  if (u.bc == BcTag::V3) {
    // Edge-clamped variant: u_theta vanishes on both theta-edges of the open
    // shell; no periodic identification is claimed.
    for (Real t : t_vals)
      for (int j = 0; j < n_samples; ++j) {
        const Real z = z_at(j);
        for (Real edge : {0.0, s.p}) {
          const Real v = u.u_theta.value(t, edge, z);
          if (std::abs(v) > kTol) bc_violation("u_theta = 0 at theta edge", t, edge, z, v);
        }
      }
  } else {
    for (Real t : t_vals)
      for (int j = 0; j < n_samples; ++j) {
        const Real z = z_at(j), theta = th_at(j);
        const Real dth =
            u.u_theta.value(t, theta + s.p, z) - u.u_theta.value(t, theta, z);
        if (std::abs(dth) > kTol)
          bc_violation("theta-periodicity of u_theta", t, theta, z, dth);
        const Real dz = u.u_z.value(t, theta + s.p, z) - u.u_z.value(t, theta, z);
        if (std::abs(dz) > kTol) bc_violation("theta-periodicity of u_z", t, theta, z, dz);
      }
  }

  if (u.bc == BcTag::PeriodicOnly) return;

  for (Real t : t_vals)
    for (int i = 0; i < n_samples; ++i) {
      const Real theta = th_at(i);
      const Real ut0 = u.u_t.value(t, theta, L0), uth0 = u.u_theta.value(t, theta, L0);
      const Real uz0 = u.u_z.value(t, theta, L0);
      const Real ut1 = u.u_t.value(t, theta, L1), uth1 = u.u_theta.value(t, theta, L1);
      const Real uz1 = u.u_z.value(t, theta, L1);
      switch (u.bc) {
        case BcTag::V1:
          if (std::abs(ut0) > kTol) bc_violation("u_t = 0 at lower edge", t, theta, L0, ut0);
          if (std::abs(uth0) > kTol)
            bc_violation("u_theta = 0 at lower edge", t, theta, L0, uth0);
          if (std::abs(uz0) > kTol) bc_violation("u_z = 0 at lower edge", t, theta, L0, uz0);
          if (std::abs(ut1) > kTol) bc_violation("u_t = 0 at upper edge", t, theta, L1, ut1);
          if (std::abs(uth1) > kTol)
            bc_violation("u_theta = 0 at upper edge", t, theta, L1, uth1);
          break;
        case BcTag::V2:
        case BcTag::V3:
          if (std::abs(uth0) > kTol)
            bc_violation("u_theta = 0 at lower edge", t, theta, L0, uth0);
          if (std::abs(uz0) > kTol) bc_violation("u_z = 0 at lower edge", t, theta, L0, uz0);
          if (std::abs(uth1) > kTol)
            bc_violation("u_theta = 0 at upper edge", t, theta, L1, uth1);
          if (std::abs(uz1) > kTol) bc_violation("u_z = 0 at upper edge", t, theta, L1, uz1);
          break;
        default:
          break;
      }
    }
}

}  // namespace kslab
