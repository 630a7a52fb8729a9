#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "kslab/operators.hpp"
#include "kslab/quadrature.hpp"
#include "kslab/smooth.hpp"
#include "kslab/surface.hpp"

using namespace kslab;

namespace {

template <typename Fn>
std::optional<ErrorCode> thrown_code(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

ZeroGaussSurface abstract_unit_cylinder() {
  return build_surface(make_profile(s1_poly({0.0, 1.0})), constant_profile(0.0),
                       constant_profile(1.0), constant_profile(1.0), 2 * kPi,
                       Interval{0.0, 1.0});
}

// Rigid rotation about the cylinder axis, written out by hand: u = (0, 1+t, 0).
DisplacementField hand_rotation_field() {
  DisplacementField u;
  u.u_theta = component_tz(s2_const(1.0), s2_const(1.0));
  return u;
}

// u = (0, 0, z): pure axial stretch.
DisplacementField axial_stretch_field() {
  DisplacementField u;
  u.u_z = component_tz(s2_from_y(s1_poly({0.0, 1.0})));
  return u;
}

// A smooth periodic field with all three components active and both t-powers,
// shifted by `shift` in theta.
DisplacementField wavy_field(Real shift = 0.0) {
  const auto sh = [&](Smooth1Ptr f) { return s1_affine_arg(std::move(f), 1.0, -shift); };
  DisplacementField u;
  u.u_t = component_tz(s2_sep(sh(s1_harmonic(0.8, 1.0, 0.3)), s1_poly({0.2, 1.0})),
                       s2_from_x(sh(s1_sin(2.0, 0.0))));
  u.u_theta = component_tz(s2_sep(sh(s1_cos(3.0, -0.4)), s1_poly({0.0, 1.0, -0.5})),
                           s2_from_x(sh(s1_harmonic(0.5, 1.0, 1.1))));
  u.u_z = component_tz(s2_sep(sh(s1_sin(1.0, 0.7)), s1_poly({1.0, -0.3})));
  u.wavenumber = 3;
  return u;
}

// alpha * a + beta * b, coefficientwise in the t-powers.
ComponentTZ combine(const ComponentTZ& a, const ComponentTZ& b, Real alpha, Real beta) {
  ComponentTZ out;
  const std::size_t n = std::max(a.coeff.size(), b.coeff.size());
  for (std::size_t k = 0; k < n; ++k) {
    Smooth2Ptr term = s2_const(0.0);
    if (k < a.coeff.size()) term = s2_sum(term, s2_scale(alpha, a.coeff[k]));
    if (k < b.coeff.size()) term = s2_sum(term, s2_scale(beta, b.coeff[k]));
    out.coeff.push_back(term);
  }
  return out;
}

DisplacementField combine(const DisplacementField& a, const DisplacementField& b,
                          Real alpha, Real beta) {
  DisplacementField out;
  out.u_t = combine(a.u_t, b.u_t, alpha, beta);
  out.u_theta = combine(a.u_theta, b.u_theta, alpha, beta);
  out.u_z = combine(a.u_z, b.u_z, alpha, beta);
  return out;
}

Mat3 skew_from(const Vec3& w) {
  Mat3 A;
  A << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return A;
}

// Largest pointwise symmetric-part residual of all six rigid basis motions at
// n random points of the shell of half-thickness t_max.
Real max_rigid_sym(const ZeroGaussSurface& s, Real t_max, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<Real> ut(-t_max, t_max), uth(0.0, s.p),
      uz(s.z_range.lo, s.z_range.hi);
  const std::vector<DisplacementField> basis = rigid_motion_basis(s);
  Real worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real t = ut(rng), theta = uth(rng), z = uz(rng);
    for (const DisplacementField& u : basis) {
      const FrameTensor G = gradient(s, u, t, theta, z, GradientKind::Full);
      worst = std::max(worst, sym_part(G).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Components and pointwise gradients
// ---------------------------------------------------------------------------

TEST_CASE("component evaluation differentiates the t-polynomial exactly") {
  const ComponentTZ f = component_tz(s2_sep(s1_sin(2.0, 0.0), s1_poly({0.0, 1.0})),
                                     s2_from_x(s1_cos(1.0, 0.0)));
  const Real t = 0.3, th = 0.9, z = 0.4;
  const Real c0 = std::sin(2 * th) * z, c1 = std::cos(th);
  CHECK(f.value(t, th, z) == doctest::Approx(c0 + t * c1).epsilon(1e-14));
  CHECK(f.deriv(1, 0, 0, t, th, z) == doctest::Approx(c1).epsilon(1e-14));
  CHECK(f.deriv(2, 0, 0, t, th, z) == 0.0);
  CHECK(f.deriv(0, 1, 0, t, th, z) ==
        doctest::Approx(2 * std::cos(2 * th) * z - t * std::sin(th)).epsilon(1e-14));
  CHECK(zero_component().value(t, th, z) == 0.0);
}

TEST_CASE("zero field has zero gradient of both kinds") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const DisplacementField u;  // all components empty
  CHECK(gradient(s, u, 0.02, 1.0, 0.5, GradientKind::Full).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gradient(s, u, 0.02, 1.0, 0.5, GradientKind::Simplified).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("rigid rotation on the unit cylinder: full gradient is skew") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const DisplacementField u = hand_rotation_field();
  const Real t = 0.04, th = 2.2, z = 0.6;
  const FrameTensor G = gradient(s, u, t, th, z, GradientKind::Full);
  CHECK(G(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(G(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  FrameTensor rest = G;
  rest(0, 1) = rest(1, 0) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(sym_part(G).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rigid rotation, simplified kind: the O(h) gap appears") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const DisplacementField u = hand_rotation_field();
  const Real t = 0.04;
  const FrameTensor G = gradient(s, u, t, 1.3, 0.2, GradientKind::Simplified);
  CHECK(G(0, 1) == doctest::Approx(-(1.0 + t)).epsilon(1e-14));
  CHECK(G(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  const FrameTensor E = sym_part(G);
  CHECK(E(0, 1) == doctest::Approx(-t / 2).epsilon(1e-12));
  CHECK(E(1, 0) == doctest::Approx(-t / 2).epsilon(1e-12));
}

TEST_CASE("sym_part fixed points and annihilation") {
  CHECK((sym_part(Mat3::Identity()) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sym_part(skew_from(Vec3(0.3, -1.0, 2.0))).cwiseAbs().maxCoeff() == 0.0);
  Mat3 shear = Mat3::Zero();
  shear(0, 1) = 1.0;
  const Mat3 E = sym_part(shear);
  CHECK(E(0, 1) == 0.5);
  CHECK(E(1, 0) == 0.5);
}

TEST_CASE("gradient refuses a degenerate thickness metric") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  CHECK(thrown_code([&] {
          gradient(s, hand_rotation_field(), -1.0, 0.5, 0.5, GradientKind::Full);
        }) == ErrorCode::DegenerateMetric);
  // The simplified kind guards the same validity condition.
  CHECK(thrown_code([&] {
          gradient(s, hand_rotation_field(), -1.2, 0.5, 0.5, GradientKind::Simplified);
        }) == ErrorCode::DegenerateMetric);
}

TEST_CASE("gradient is linear in the field") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const DisplacementField a = wavy_field(), b = wavy_field(0.77);
  const DisplacementField both = combine(a, b, 0.7, -1.3);
  std::mt19937 rng(42);
  std::uniform_real_distribution<Real> ut(-0.05, 0.05), uth(0.0, 2 * kPi), uz(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Real t = ut(rng), th = uth(rng), z = uz(rng);
    for (GradientKind kind : {GradientKind::Full, GradientKind::Simplified}) {
      const FrameTensor lhs = gradient(s, both, t, th, z, kind);
      const FrameTensor rhs = 0.7 * gradient(s, a, t, th, z, kind) -
                              1.3 * gradient(s, b, t, th, z, kind);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("full and simplified gradients differ only within the curvature factor") {
  const ZeroGaussSurface s = preset_cylinder_ellipse(1.0, 0.6, 512, 1.0);
  Real max_c = 0.0, min_A = std::numeric_limits<Real>::max();
  for (int i = 0; i < 4096; ++i) {
    const Real th = s.p * Real(i) / 4096.0;
    max_c = std::max(max_c, std::abs(s.c(th)));
    min_A = std::min(min_A, s.A_theta(th, 0.5));
  }
  const Real h = 0.2;
  REQUIRE(h * max_c < min_A);
  const Real factor = h * max_c / (2 * min_A - h * max_c);
  const DisplacementField u = wavy_field();
  std::mt19937 rng(7);
  std::uniform_real_distribution<Real> ut(-h / 2, h / 2), uth(0.0, s.p), uz(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Real t = ut(rng), th = uth(rng), z = uz(rng);
    const FrameTensor Gf = gradient(s, u, t, th, z, GradientKind::Full);
    const FrameTensor Gs = gradient(s, u, t, th, z, GradientKind::Simplified);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(Gf(r, c) - Gs(r, c)) <=
              factor * std::abs(Gf(r, c)) + 1e-18);
  }
}

// ---------------------------------------------------------------------------
// Energy norms
// ---------------------------------------------------------------------------

TEST_CASE("axial stretch integrates to the area times thickness") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const Real h = 0.1;
  const NormBundle n = energy_norms(s, axial_stretch_field(), h, QuadratureSpec{});
  CHECK(n.sym_simp_sq == doctest::Approx(2 * kPi * h).epsilon(1e-12));
  CHECK(n.grad_simp_sq == doctest::Approx(2 * kPi * h).epsilon(1e-12));
  CHECK(n.sym_full_sq == doctest::Approx(2 * kPi * h).epsilon(1e-12));
  CHECK(n.uz_sq == doctest::Approx(2 * kPi * h / 3).epsilon(1e-12));
  CHECK(n.ut_sq == 0.0);
  CHECK(n.utheta_sq == 0.0);
  CHECK_FALSE(n.unresolved_oscillation);
}

TEST_CASE("zero field has vanishing norms") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const NormBundle n = energy_norms(s, DisplacementField{}, 0.1, QuadratureSpec{});
  CHECK(n.grad_full_sq == 0.0);
  CHECK(n.sym_full_sq == 0.0);
  CHECK(n.grad_simp_sq == 0.0);
  CHECK(n.sym_simp_sq == 0.0);
}

TEST_CASE("rigid rotation: symmetric energy vanishes, gradient energy is 4*pi*h*L") {
  const Real L = 2.0, h = 0.08;
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, L);
  const NormBundle n = energy_norms(s, hand_rotation_field(), h, QuadratureSpec{});
  CHECK(n.sym_full_sq < 1e-12);
  CHECK(n.grad_full_sq == doctest::Approx(4 * kPi * h * L).epsilon(1e-12));
}

TEST_CASE("symmetric part never exceeds the full gradient in energy") {
  const ZeroGaussSurface s = preset_cylinder_ellipse(1.0, 0.7, 512, 1.0);
  const NormBundle n = energy_norms(s, wavy_field(), 0.05, QuadratureSpec{});
  CHECK(n.sym_full_sq <= n.grad_full_sq);
  CHECK(n.sym_simp_sq <= n.grad_simp_sq);
  CHECK(n.grad_full_sq > 0.0);
}

TEST_CASE("energy norms are invariant under theta-translation on a circular cylinder") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const NormBundle a = energy_norms(s, wavy_field(), 0.07, QuadratureSpec{});
  const NormBundle b = energy_norms(s, wavy_field(0.937), 0.07, QuadratureSpec{});
  CHECK(a.grad_full_sq == doctest::Approx(b.grad_full_sq).epsilon(1e-10));
  CHECK(a.sym_full_sq == doctest::Approx(b.sym_full_sq).epsilon(1e-10));
  CHECK(a.grad_simp_sq == doctest::Approx(b.grad_simp_sq).epsilon(1e-10));
  CHECK(a.sym_simp_sq == doctest::Approx(b.sym_simp_sq).epsilon(1e-10));
  CHECK(a.ut_sq == doctest::Approx(b.ut_sq).epsilon(1e-10));
  CHECK(a.utheta_sq == doctest::Approx(b.utheta_sq).epsilon(1e-10));
  CHECK(a.uz_sq == doctest::Approx(b.uz_sq).epsilon(1e-10));
}

TEST_CASE("energy norms validate thickness and resolution") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  CHECK(thrown_code([&] { energy_norms(s, wavy_field(), 0.0, QuadratureSpec{}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] { energy_norms(s, wavy_field(), 1.0, QuadratureSpec{}); }) ==
        ErrorCode::InvalidArgument);

  DisplacementField u = wavy_field();
  u.wavenumber = 10;
  QuadratureSpec q;
  q.n_theta = 64;  // below 8 nodes per wave
  CHECK(energy_norms(s, u, 0.1, q).unresolved_oscillation);
  q.n_theta = 80;
  CHECK_FALSE(energy_norms(s, u, 0.1, q).unresolved_oscillation);

  // Curvature 4 against A_theta = 1: half-thickness 0.3 * 4 exceeds 1.
  const ZeroGaussSurface tight =
      build_surface(make_profile(s1_poly({0.0, 1.0})), constant_profile(0.0),
                    constant_profile(1.0), constant_profile(4.0), 2 * kPi,
                    Interval{0.0, 1.0});
  CHECK(thrown_code([&] { energy_norms(tight, wavy_field(), 0.6, QuadratureSpec{}); }) ==
        ErrorCode::DegenerateMetric);
}

TEST_CASE("integration by parts swaps mixed theta-z products on a slice") {
  const Real L = kPi;
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, L);
  // u_theta vanishes at both z-ends; u_z is free. Equal harmonics keep the
  // theta-integral away from zero so the identity is exercised, not vacuous.
  const ComponentTZ uth =
      component_tz(s2_sep(s1_harmonic(1.0, 2.0, 0.3), s1_sin_sq_window(0.0, L)));
  const ComponentTZ uzc =
      component_tz(s2_sep(s1_harmonic(1.0, 2.0, -0.7), s1_poly({0.3, 1.0, -0.4})));
  const Rule1D rth = periodic_trapezoid(256, 2 * kPi);
  const Rule1D rz = gauss_legendre_panels(8, 16, 0.0, L);
  const Real t = 0.0;
  Real lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < rth.nodes.size(); ++i)
    for (std::size_t j = 0; j < rz.nodes.size(); ++j) {
      const Real w = rth.weights[i] * rz.weights[j];
      const Real th = rth.nodes[i], z = rz.nodes[j];
      lhs += w * uth.deriv(0, 0, 1, t, th, z) * uzc.deriv(0, 1, 0, t, th, z);
      rhs += w * uth.deriv(0, 1, 0, t, th, z) * uzc.deriv(0, 0, 1, t, th, z);
    }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  CHECK(std::abs(lhs) > 1e-3);  // the identity is not vacuous
}

// ---------------------------------------------------------------------------
// Korn functionals
// ---------------------------------------------------------------------------

TEST_CASE("korn functionals on the hand-built rotation") {
  const Real L = 1.0, h = 0.1;
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, L);
  const KornFunctionals k = korn_functionals(s, hand_rotation_field(), h, QuadratureSpec{});
  CHECK(k.q_full < 1e-12);
  // Simplified quotient has the closed form (h^3/24) / (2h + h^3/12).
  const Real expected = (h * h * h / 24) / (2 * h + h * h * h / 12);
  CHECK(k.q_simp == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("korn functionals: axial stretch saturates the first-and-a-half ratio") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const KornFunctionals k =
      korn_functionals(s, axial_stretch_field(), 0.1, QuadratureSpec{});
  // u_t = 0, so the denominator reduces to the symmetric energy itself.
  CHECK(k.r_15 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.q_simp == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("korn functionals refuse the zero field") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  CHECK(thrown_code([&] {
          korn_functionals(s, DisplacementField{}, 0.1, QuadratureSpec{});
        }) == ErrorCode::ZeroField);
}

// ---------------------------------------------------------------------------
// Rigid motions
// ---------------------------------------------------------------------------

TEST_CASE("rigid motion components on the unit cylinder match hand projection") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<Real> ut(-0.05, 0.05), uth(0.0, 2 * kPi), uz(0.0, 1.0);

  const DisplacementField axial = rigid_motion_field(s, Mat3::Zero(), Vec3(0, 0, 1));
  const DisplacementField spin = rigid_motion_field(s, skew_from(Vec3(0, 0, 1)), Vec3::Zero());
  const DisplacementField slide = rigid_motion_field(s, Mat3::Zero(), Vec3(1, 0, 0));
  for (int i = 0; i < 50; ++i) {
    const Real t = ut(rng), th = uth(rng), z = uz(rng);
    CHECK(axial.u_t.value(t, th, z) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(axial.u_theta.value(t, th, z) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(axial.u_z.value(t, th, z) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(spin.u_t.value(t, th, z) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(spin.u_theta.value(t, th, z) == doctest::Approx(1.0 + t).epsilon(1e-13));
    CHECK(spin.u_z.value(t, th, z) == doctest::Approx(0.0).epsilon(1e-13));

    CHECK(slide.u_t.value(t, th, z) == doctest::Approx(std::cos(th)).epsilon(1e-13));
    CHECK(slide.u_theta.value(t, th, z) == doctest::Approx(-std::sin(th)).epsilon(1e-13));
    CHECK(slide.u_z.value(t, th, z) == doctest::Approx(0.0).epsilon(1e-13));
  }
}

TEST_CASE("rigid motions require a skew matrix and an embedding") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  Mat3 bad = Mat3::Zero();
  bad(0, 0) = 1.0;
  CHECK(thrown_code([&] { rigid_motion_field(s, bad, Vec3::Zero()); }) ==
        ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] {
          rigid_motion_field(abstract_unit_cylinder(), Mat3::Zero(), Vec3(1, 0, 0));
        }) == ErrorCode::NoEmbedding);
}

TEST_CASE("rigid basis motions are in the kernel of the symmetric gradient") {
  CHECK(max_rigid_sym(preset_cylinder_circular(1.0, 2.0), 0.05, 1000, 101) < 1e-12);
  CHECK(max_rigid_sym(preset_cone_circle(kPi / 4, 0.5, 1.5), 0.05, 1000, 102) < 1e-12);
  CHECK(max_rigid_sym(preset_cylinder_flat_patch(1.0), 0.05, 1000, 103) < 1e-12);
}

TEST_CASE("sampled directrix keeps the rigid kernel to interpolation accuracy") {
  // The declared curvature of a sampled curve agrees with the spline embedding
  // to second order in the sample spacing, so the kernel residual shrinks by
  // about 16x when the sampling doubles.
  const Real coarse =
      max_rigid_sym(preset_cylinder_ellipse(1.0, 0.6, 512, 1.0), 0.05, 200, 104);
  const Real fine =
      max_rigid_sym(preset_cylinder_ellipse(1.0, 0.6, 2048, 1.0), 0.05, 200, 104);
  CHECK(coarse < 1e-3);
  CHECK(fine < 1e-4);
  CHECK(fine < coarse);
}

// ---------------------------------------------------------------------------
// Cross-validation against the embedding
// ---------------------------------------------------------------------------

TEST_CASE("frame gradient matches the Cartesian chain rule on rigid motions") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const DisplacementField u =
      rigid_motion_field(s, skew_from(Vec3(1.0, 0.0, 0.0)), Vec3(0.2, -0.1, 0.5));
  CHECK(cartesian_consistency(s, u, 0.03, 1.1, 0.6, 1e-5) < 1e-10);
  CHECK(cartesian_consistency(s, u, -0.04, 4.9, 0.2, 1e-5) < 1e-10);
}

TEST_CASE("frame gradient matches the Cartesian chain rule on a wavy field") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  DisplacementField u;
  u.u_t = component_tz(s2_sep(s1_sin(1.0, 0.0), s1_cos(1.0, 0.0)));
  const Real err = cartesian_consistency(s, u, 0.02, 0.8, 0.5, 1e-5);
  CHECK(err < 1e-6);
  // A step at rounding scale is dominated by cancellation; the operation
  // reports whatever the differences give and the caller picks the step.
  const Real cancel = cartesian_consistency(s, u, 0.02, 0.8, 0.5, 1e-12);
  CHECK(cancel > 1e-8);
  CHECK(cancel > err);
}

TEST_CASE("consistency check requires an embedding") {
  CHECK(thrown_code([&] {
          cartesian_consistency(abstract_unit_cylinder(), wavy_field(), 0.0, 1.0, 0.5,
                                1e-5);
        }) == ErrorCode::NoEmbedding);
}

// ---------------------------------------------------------------------------
// Declared boundary conditions
// ---------------------------------------------------------------------------

namespace {

// Periodic in theta, vanishing with the window at both z-ends.
DisplacementField clamped_field(Real L) {
  DisplacementField u;
  u.u_theta = component_tz(s2_sep(s1_sin(2.0, 0.1), s1_sin_sq_window(0.0, L)));
  u.u_z = component_tz(s2_sep(s1_cos(1.0, 0.4), s1_sin_sq_window(0.0, L)));
  return u;
}

}  // namespace

TEST_CASE("boundary checks accept matching declarations") {
  const Real L = 1.0;
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, L);

  DisplacementField v2 = clamped_field(L);
  v2.bc = BcTag::V2;
  check_field_bc(s, v2, 0.1);

  DisplacementField v1 = clamped_field(L);
  v1.u_t = component_tz(s2_sep(s1_cos(3.0, 0.0), s1_sin_sq_window(0.0, L)));
  // u_z may be nonzero at the upper edge under the first subspace.
  v1.u_z = component_tz(s2_sep(s1_sin(1.0, 0.0), s1_poly({0.0, 1.0})));
  v1.bc = BcTag::V1;
  check_field_bc(s, v1, 0.1);

  // The same field violates the second subspace at the upper edge.
  v1.bc = BcTag::V2;
  CHECK(thrown_code([&] { check_field_bc(s, v1, 0.1); }) == ErrorCode::InvalidArgument);

  DisplacementField per = wavy_field();
  per.bc = BcTag::PeriodicOnly;
  check_field_bc(s, per, 0.1);
}

TEST_CASE("edge-clamped variant replaces periodicity by vanishing u_theta") {
  const Real L = 1.0;
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, L);
  DisplacementField v3;
  // sin(theta/2) vanishes at theta = 0 and theta = 2*pi but is not periodic.
  v3.u_theta = component_tz(s2_sep(s1_sin(0.5, 0.0), s1_sin_sq_window(0.0, L)));
  v3.u_z = component_tz(s2_sep(s1_cos(1.0, 0.0), s1_sin_sq_window(0.0, L)));
  v3.bc = BcTag::V3;
  check_field_bc(s, v3, 0.1);

  // Under periodic tags the same u_theta is rejected...
  v3.bc = BcTag::PeriodicOnly;
  CHECK(thrown_code([&] { check_field_bc(s, v3, 0.1); }) == ErrorCode::InvalidArgument);

  // ...and an edge value breaks the clamped variant.
  DisplacementField bad;
  bad.u_theta = component_tz(s2_sep(s1_cos(1.0, 0.0), s1_sin_sq_window(0.0, L)));
  bad.u_z = zero_component();
  bad.bc = BcTag::V3;
  CHECK(thrown_code([&] { check_field_bc(s, bad, 0.1); }) == ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------------------
// Grid-sampled coefficients
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd sample_grid(int nx, int ny, Real period, Interval yr,
                            const std::function<Real(Real, Real)>& f) {
  Eigen::MatrixXd v(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      v(i, j) = f(period * Real(i) / Real(nx),
                  yr.lo + yr.length() * Real(j) / Real(ny - 1));
  return v;
}

}  // namespace

TEST_CASE("grid-sampled coefficients reproduce a smooth function and its partials") {
  const Real p = 2 * kPi;
  const Interval yr{0.0, 1.0};
  const auto f = [](Real x, Real y) { return std::cos(2 * x) * std::sin(1.3 * y + 0.4); };
  const auto fx = [](Real x, Real y) {
    return -2 * std::sin(2 * x) * std::sin(1.3 * y + 0.4);
  };
  const auto fy = [](Real x, Real y) {
    return 1.3 * std::cos(2 * x) * std::cos(1.3 * y + 0.4);
  };
  const Smooth2Ptr coarse = s2_grid_sampled(sample_grid(64, 33, p, yr, f), p, yr);
  const Smooth2Ptr fine = s2_grid_sampled(sample_grid(128, 65, p, yr, f), p, yr);

  std::mt19937 rng(11);
  std::uniform_real_distribution<Real> ux(0.0, p), uy(0.15, 0.85);
  Real ev = 0, evf = 0, ed = 0, edf = 0;
  for (int i = 0; i < 200; ++i) {
    const Real x = ux(rng), y = uy(rng);
    ev = std::max(ev, std::abs(coarse->deriv(0, 0, x, y) - f(x, y)));
    evf = std::max(evf, std::abs(fine->deriv(0, 0, x, y) - f(x, y)));
    ed = std::max(ed, std::abs(coarse->deriv(1, 0, x, y) - fx(x, y)));
    ed = std::max(ed, std::abs(coarse->deriv(0, 1, x, y) - fy(x, y)));
    edf = std::max(edf, std::abs(fine->deriv(1, 0, x, y) - fx(x, y)));
    edf = std::max(edf, std::abs(fine->deriv(0, 1, x, y) - fy(x, y)));
  }
  CHECK(ev < 1e-4);
  CHECK(ed < 1e-3);
  CHECK(evf < ev / 8);  // interior accuracy is fourth order
  CHECK(edf < ed / 8);

  // One-sided boundary stencils are second order.
  CHECK(std::abs(coarse->deriv(0, 1, 1.0, 0.0) - fy(1.0, 0.0)) < 5e-3);
  CHECK(std::abs(coarse->deriv(0, 1, 1.0, 1.0) - fy(1.0, 1.0)) < 5e-3);

  // Periodic wrap: approaching the seam from both sides agrees.
  CHECK(coarse->deriv(0, 0, 0.0, 0.5) ==
        doctest::Approx(coarse->deriv(0, 0, p, 0.5)).epsilon(1e-13));
}

TEST_CASE("grid-sampled coefficients refuse unsupported requests") {
  const Real p = 2 * kPi;
  const Interval yr{0.0, 1.0};
  const auto f = [](Real x, Real y) { return std::sin(x) + y; };
  const Smooth2Ptr g = s2_grid_sampled(sample_grid(32, 9, p, yr, f), p, yr);
  CHECK(thrown_code([&] { g->deriv(1, 1, 1.0, 0.5); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] { g->deriv(2, 0, 1.0, 0.5); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] { s2_grid_sampled(Eigen::MatrixXd::Zero(4, 4), p, yr); }) ==
        ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] { s2_grid_sampled(Eigen::MatrixXd::Zero(8, 4), 0.0, yr); }) ==
        ErrorCode::InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(8, 4);
  bad(3, 2) = std::numeric_limits<Real>::quiet_NaN();
  CHECK(thrown_code([&] { s2_grid_sampled(bad, p, yr); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("grid-sampled fields drive the energy norms like closed forms") {
  const ZeroGaussSurface s = preset_cylinder_circular(1.0, 1.0);
  const Real p = 2 * kPi;
  const Interval yr{0.0, 1.0};
  DisplacementField exact, sampled;
  exact.u_z = component_tz(s2_sep(s1_sin(1.0, 0.0), s1_poly({0.0, 1.0})));
  sampled.u_z = component_tz(s2_grid_sampled(
      sample_grid(128, 65, p, yr, [](Real x, Real y) { return std::sin(x) * y; }), p, yr));
  const NormBundle a = energy_norms(s, exact, 0.1, QuadratureSpec{});
  const NormBundle b = energy_norms(s, sampled, 0.1, QuadratureSpec{});
  CHECK(b.grad_full_sq == doctest::Approx(a.grad_full_sq).epsilon(1e-4));
  CHECK(b.sym_full_sq == doctest::Approx(a.sym_full_sq).epsilon(1e-4));
  CHECK(b.uz_sq == doctest::Approx(a.uz_sq).epsilon(1e-6));
}
