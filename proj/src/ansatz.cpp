#include "kslab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

// Denominator guard: the membrane closure divides by the curvature
// coefficient, which is legal only where it does not vanish.
class CurvatureGuardS1 final : public Smooth1 {
 public:
  explicit CurvatureGuardS1(Smooth1Ptr f) : f_(std::move(f)) {}
  Real deriv(int order, Real x) const override {
    if (std::abs(f_->deriv(0, x)) < 1e-300) {
      std::ostringstream os;
      os << "curvature coefficient vanishes at theta = " << x
         << "; the membrane system cannot be closed there";
      fail(ErrorCode::ZeroCurvature, os.str());
    }
    return f_->deriv(order, x);
  }

 private:
  Smooth1Ptr f_;
};

struct MembraneClosure {
  Smooth2Ptr v_t, w_th, w_z;
};

// Rows 1-4 of the mid-surface strain system: given the tangential pair
// (v_theta, v_z), produce v_t and the linear-in-t part so that every t = 0
// symmetric strain component except zz vanishes identically:
//   v_t  = -(v_theta,theta + a v_z) / c,
//   w_th = (c v_theta - v_t,theta) / A_theta,
//   w_z  = -v_t,z / A_z.
MembraneClosure close_membrane_system(const ZeroGaussSurface& s, const Smooth2Ptr& v_th,
                                      const Smooth2Ptr& v_z) {
  const Smooth2Ptr Ath = s2_sum(s2_sep(s.a.fn, s.B.fn), s2_from_x(s.b.fn));
  const Smooth2Ptr Az = s2_from_y(s1_deriv(s.B.fn));
  const Smooth2Ptr a2 = s2_from_x(s.a.fn);
  const Smooth2Ptr c_guarded = s2_from_x(std::make_shared<CurvatureGuardS1>(s.c.fn));
  MembraneClosure out;
  out.v_t =
      s2_scale(-1.0, s2_quot(s2_sum(s2_dx(v_th), s2_prod(a2, v_z)), c_guarded));
  out.w_th = s2_quot(
      s2_sum(s2_prod(s2_from_x(s.c.fn), v_th), s2_scale(-1.0, s2_dx(out.v_t))), Ath);
  out.w_z = s2_scale(-1.0, s2_quot(s2_dy(out.v_t), Az));
  return out;
}

DisplacementField assemble_affine(const Smooth2Ptr& v_t, const Smooth2Ptr& v_th,
                                  const Smooth2Ptr& v_z, const MembraneClosure& m,
                                  int wavenumber) {
  DisplacementField u;
  u.u_t = component_tz(v_t);  // w_t = 0
  u.u_theta = component_tz(v_th, m.w_th);
  u.u_z = component_tz(v_z, m.w_z);
  u.wavenumber = wavenumber;
  return u;
}

}  // namespace

// ---------------------------------------------------------------------------
// Oscillating generators
// ---------------------------------------------------------------------------

int oscillation_index(Real h) {
  if (!(h > 0) || h > 1)
    fail(ErrorCode::InvalidArgument, "oscillation index needs 0 < h <= 1");
  // Integer part of h^(-1/4); the tiny relative nudge keeps exact powers such
  // as h = n^-4 from landing one ulp below the integer.
  return std::max(1, static_cast<int>(std::floor(std::pow(h, -0.25) * (1.0 + 1e-12))));
}

OscillatingPhi oscillating_phi(Smooth2Ptr Phi, Real h, Smooth2Ptr eta) {
  const int n = oscillation_index(h);
  OscillatingPhi out;
  out.n = n;
  out.phi = s2_affine_x(std::move(Phi), Real(n), 0.0);
  if (eta) out.phi = s2_prod(std::move(eta), out.phi);
  return out;
}

Smooth2Ptr default_oscillation_profile(Real p, Interval z_range) {
  if (!(p > 0) || !(z_range.length() > 0))
    fail(ErrorCode::InvalidArgument, "oscillation profile needs positive extents");
  return s2_sep(s1_cos(2 * kPi / p, 0.0),
                s1_sin_sq_window(z_range.lo, z_range.hi));
}

// ---------------------------------------------------------------------------
// Plate bending
// ---------------------------------------------------------------------------

AnsatzField kirchhoff_field(Smooth2Ptr phi, Real h) {
  if (!(h > 0) || !(h < 1)) fail(ErrorCode::InvalidArgument, "thickness must lie in (0, 1)");
  AnsatzField out;
  out.kind = AnsatzCase::Plate;
  out.h = h;
  out.phi = phi;
  out.field.u_t = component_tz(phi);
  out.field.u_theta = component_tz(s2_const(0.0), s2_scale(-1.0, s2_dx(phi)));
  out.field.u_z = component_tz(s2_const(0.0), s2_scale(-1.0, s2_dy(phi)));
  return out;
}

KirchhoffEnergies kirchhoff_energies(const Smooth2Ptr& phi, Real h, Interval x1,
                                     Interval x2, int nodes_per_panel, int panels) {
  if (!(h > 0) || !(h < 1)) fail(ErrorCode::InvalidArgument, "thickness must lie in (0, 1)");
  if (nodes_per_panel < 2 || panels < 1)
    fail(ErrorCode::InvalidArgument, "plate quadrature needs positive node counts");
  const Rule1D rx = gauss_legendre_panels(nodes_per_panel, panels, x1.lo, x1.hi);
  const Rule1D ry = gauss_legendre_panels(nodes_per_panel, panels, x2.lo, x2.hi);
  const Rule1D rt = gauss_legendre(4, -h / 2, h / 2);
  KirchhoffEnergies out;
  DTable d;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i)
    for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
      const Real w = rx.weights[i] * ry.weights[j];
      phi->derivs(rx.nodes[i], ry.nodes[j], 2, 2, d);
      const Real px = d(1, 0), py = d(0, 1);
      const Real pxx = d(2, 0), pxy = d(1, 1), pyy = d(0, 2);
      out.p_sq += w * (px * px + py * py);
      out.d_sq += w * (pxx * pxx + 2 * pxy * pxy + pyy * pyy);
      for (std::size_t k = 0; k < rt.nodes.size(); ++k) {
        const Real t = rt.nodes[k], wt = w * rt.weights[k];
        Mat3 G;
        G << -t * pxx, -t * pxy, -px,  //
            -t * pxy, -t * pyy, -py,   //
            px, py, 0;
        out.raw_grad_sq += wt * G.squaredNorm();
        out.raw_sym_sq += wt * sym_part(G).squaredNorm();
      }
    }
  out.sym_sq = out.raw_sym_sq / h;
  out.grad_sq = (out.raw_grad_sq + out.raw_sym_sq) / (2 * h);
  out.quotient = out.grad_sq > 0 ? out.sym_sq / out.grad_sq : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Separable shells
// ---------------------------------------------------------------------------

namespace {

struct SeparableFactors {
  Smooth1Ptr H, G;
};

// Decide whether a and b are linearly dependent and return the metric-ratio
// factors A_z/A_theta = H(theta)/G(z).  With a = k*b the split is H = 1/b,
// G = (k*B + 1)/B'; with b = k*a it is H = 1/a, G = (B + k)/B'.
SeparableFactors separable_factors(const ZeroGaussSurface& s) {
  constexpr int kSamples = 512;
  Real Saa = 0, Sbb = 0, Sab = 0, amax = 0, bmax = 0;
  std::vector<Real> av(kSamples), bv(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const Real th = s.p * Real(i) / kSamples;
    av[i] = s.a(th);
    bv[i] = s.b(th);
    Saa += av[i] * av[i];
    Sbb += bv[i] * bv[i];
    Sab += av[i] * bv[i];
    amax = std::max(amax, std::abs(av[i]));
    bmax = std::max(bmax, std::abs(bv[i]));
  }
  const Real scale = std::max({amax, bmax, Real(1e-30)});
  const Real tol = 1e-10 * scale;

  const auto residual = [&](Real k, bool a_from_b) {
    Real r = 0;
    for (int i = 0; i < kSamples; ++i)
      r = std::max(r, std::abs(a_from_b ? av[i] - k * bv[i] : bv[i] - k * av[i]));
    return r;
  };

  Real lambda = 0.0;
  bool a_from_b;
  if (amax <= tol) {
    lambda = 0.0;  // a == 0
    a_from_b = true;
  } else if (bmax <= tol) {
    lambda = 0.0;  // b == 0
    a_from_b = false;
  } else if (residual(Sab / Sbb, true) <= tol) {
    lambda = Sab / Sbb;
    a_from_b = true;
  } else if (residual(Sab / Saa, false) <= tol) {
    lambda = Sab / Saa;
    a_from_b = false;
  } else {
    fail(ErrorCode::NotSeparable,
         "profiles a and b are linearly independent; the metric ratio does not "
         "split into H(theta)/G(z)");
  }

  const Smooth1Ptr Bp = s1_deriv(s.B.fn);
  SeparableFactors out;
  if (a_from_b) {
    out.H = s1_quot(s1_const(1.0), s.b.fn);
    out.G = s1_quot(s1_sum(s1_scale(lambda, s.B.fn), s1_const(1.0)), Bp);
  } else {
    out.H = s1_quot(s1_const(1.0), s.a.fn);
    out.G = s1_quot(s1_sum(s.B.fn, s1_const(lambda)), Bp);
  }
  return out;
}

}  // namespace

AnsatzField separable_field(const ZeroGaussSurface& s, Smooth2Ptr phi, Real h) {
  if (!(h > 0) || !(h < 1)) fail(ErrorCode::InvalidArgument, "thickness must lie in (0, 1)");
  const SeparableFactors f = separable_factors(s);
  const Smooth2Ptr Ath = s2_sum(s2_sep(s.a.fn, s.B.fn), s2_from_x(s.b.fn));
  // General tangential solution of the remaining strain equation:
  //   v_z = A_theta G H phi_z,  v_theta = -A_theta H^2 phi_theta.
  const Smooth2Ptr v_z = s2_prod(Ath, s2_prod(s2_sep(f.H, f.G), s2_dy(phi)));
  const Smooth2Ptr v_th = s2_scale(
      -1.0, s2_prod(Ath, s2_prod(s2_from_x(s1_prod(f.H, f.H)), s2_dx(phi))));
  const MembraneClosure m = close_membrane_system(s, v_th, v_z);

  AnsatzField out;
  out.kind = AnsatzCase::Separable;
  out.h = h;
  out.phi = phi;
  out.sep_H = f.H;
  out.sep_G = f.G;
  out.field = assemble_affine(m.v_t, v_th, v_z, m, 1);
  return out;
}

AnsatzField separable_field(const ZeroGaussSurface& s, const OscillatingPhi& phi,
                            Real h) {
  AnsatzField out = separable_field(s, phi.phi, h);
  out.n_osc = phi.n;
  out.field.wavenumber = std::max(1, phi.n);
  return out;
}

// ---------------------------------------------------------------------------
// Nonseparable shells
// ---------------------------------------------------------------------------

AnsatzField nonseparable_field(const ZeroGaussSurface& s, Smooth2Ptr phi, Real h,
                               Interval theta_window) {
  if (!(h > 0) || !(h < 1)) fail(ErrorCode::InvalidArgument, "thickness must lie in (0, 1)");
  if (!(theta_window.lo >= 0) || !(theta_window.hi <= s.p) ||
      !(theta_window.length() > 0))
    fail(ErrorCode::InvalidArgument, "theta window must be a nonempty subinterval of [0, p]");

  const Smooth1Ptr rho = s1_quot(s.b.fn, s.a.fn);
  const Smooth1Ptr rho_p = s1_deriv(rho);

  // The construction divides by a and rho' inside the window: both must stay
  // away from zero there.
  constexpr int kSamples = 256;
  Real min_a = std::numeric_limits<Real>::max(), max_a = 0;
  bool a_flips = false;
  Real a_prev = 0;
  for (int i = 0; i <= kSamples; ++i) {
    const Real th =
        theta_window.lo + theta_window.length() * Real(i) / Real(kSamples);
    const Real av = s.a(th);
    min_a = std::min(min_a, std::abs(av));
    max_a = std::max(max_a, std::abs(av));
    // A sign flip between adjacent samples pins a zero of the continuous a
    // strictly between them, even when no sample lands near it.
    if (i > 0 && ((a_prev < 0 && av > 0) || (a_prev > 0 && av < 0))) a_flips = true;
    a_prev = av;
  }
  if (a_flips || min_a <= 1e-12 * std::max(max_a, Real(1)))
    fail(ErrorCode::DegenerateProfileRatio,
         "profile a vanishes on the theta window; the ratio b/a is unusable");
  Real min_rp = std::numeric_limits<Real>::max(), max_rp = 0;
  bool sign_change = false;
  Real prev = 0;
  for (int i = 0; i <= kSamples; ++i) {
    const Real th =
        theta_window.lo + theta_window.length() * Real(i) / Real(kSamples);
    const Real rp = rho_p->deriv(0, th);
    min_rp = std::min(min_rp, std::abs(rp));
    max_rp = std::max(max_rp, std::abs(rp));
    // A sign flip between adjacent samples pins a zero of the continuous rho'
    // strictly between them, even when no sample lands near it.
    if (i > 0 && ((prev < 0 && rp > 0) || (prev > 0 && rp < 0))) sign_change = true;
    prev = rp;
  }
  if (sign_change || min_rp <= 1e-10 * std::max(max_rp, Real(1)))
    fail(ErrorCode::DegenerateProfileRatio,
         "derivative of the profile ratio b/a vanishes on the theta window");

  // phi must live entirely inside the window box.
  Real inside = 0, outside = 0;
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j <= 32; ++j) {
      const Real th = s.p * Real(i) / 256.0;
      const Real z = s.z_range.lo + s.z_range.length() * Real(j) / 32.0;
      const Real v = std::abs(phi->deriv(0, 0, th, z));
      if (theta_window.contains(th) && s.z_range.contains(z))
        inside = std::max(inside, v);
      else
        outside = std::max(outside, v);
    }
  if (outside > 1e-12 * std::max(inside, Real(1)))
    fail(ErrorCode::SupportViolation,
         "generator is not supported inside the declared theta window");

  const Interval zbox = s.z_range;
  const auto masked = [&](Smooth2Ptr g) {
    return s2_support_box(std::move(g), theta_window, zbox);
  };

  // v_theta = (1/a) d/dtheta (phi_theta / rho'),
  // v_z = (B' phi_theta + rho' phi_z - (B + rho) phi_theta_z) / (B' rho').
  const Smooth2Ptr rho_p2 = s2_from_x(rho_p);
  const Smooth2Ptr v_th_raw =
      s2_quot(s2_dx(s2_quot(s2_dx(phi), rho_p2)), s2_from_x(s.a.fn));
  const Smooth2Ptr Bp2 = s2_from_y(s1_deriv(s.B.fn));
  const Smooth2Ptr num = s2_sum(
      s2_prod(Bp2, s2_dx(phi)),
      s2_sum(s2_prod(rho_p2, s2_dy(phi)),
             s2_scale(-1.0, s2_prod(s2_sum(s2_from_y(s.B.fn), s2_from_x(rho)),
                                    s2_dy(s2_dx(phi))))));
  const Smooth2Ptr v_z_raw = s2_quot(num, s2_prod(Bp2, rho_p2));

  const Smooth2Ptr v_th = masked(v_th_raw);
  const Smooth2Ptr v_z = masked(v_z_raw);
  MembraneClosure m = close_membrane_system(s, v_th, v_z);
  m.v_t = masked(m.v_t);
  m.w_th = masked(m.w_th);
  m.w_z = masked(m.w_z);

  AnsatzField out;
  out.kind = AnsatzCase::Nonseparable;
  out.h = h;
  out.phi = phi;
  out.profile_ratio = rho;
  out.field = assemble_affine(m.v_t, v_th, v_z, m, 1);
  return out;
}

AnsatzField nonseparable_field(const ZeroGaussSurface& s, const OscillatingPhi& phi,
                               Real h, Interval theta_window) {
  AnsatzField out = nonseparable_field(s, phi.phi, h, theta_window);
  out.n_osc = phi.n;
  out.field.wavenumber = std::max(1, phi.n);
  return out;
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

Real membrane_residual(const ZeroGaussSurface& s, const AnsatzField& f,
                       int n_samples) {
  if (n_samples < 2) fail(ErrorCode::InvalidArgument, "need at least a 2x2 grid");
  Real worst = 0.0;
  for (int i = 0; i < n_samples; ++i)
    for (int j = 0; j <= n_samples; ++j) {
      const Real th = s.p * (Real(i) + 0.5) / Real(n_samples);
      const Real z = s.z_range.lo + s.z_range.length() * Real(j) / Real(n_samples);
      const FrameTensor E0 =
          sym_part(gradient(s, f.field, 0.0, th, z, GradientKind::Simplified));
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          if (!(r == 2 && c == 2)) worst = std::max(worst, std::abs(E0(r, c)));
    }
  return worst;
}

}  // namespace kslab
