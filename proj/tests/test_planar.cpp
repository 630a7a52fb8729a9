#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "kslab/expr.hpp"
#include "kslab/operators.hpp"
#include "kslab/planar.hpp"
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

std::string num(Real v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

PlanarField field_xy(Smooth2Ptr u, Smooth2Ptr v,
                     PlanarVariant variant = PlanarVariant::PeriodicU) {
  return PlanarField{std::move(u), std::move(v), variant};
}

const Smooth2Ptr kX = s2_from_x(s1_poly({0.0, 1.0}));
const Smooth2Ptr kY = s2_from_y(s1_poly({0.0, 1.0}));

// Composite Simpson rule used as the independent quadrature oracle.
template <class F>
Real simpson2(Real h, Real p, int n, F&& f) {
  const Real dx = h / n, dy = p / n;
  const auto wt = [n](int k) { return k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0); };
  Real acc = 0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      acc += wt(i) * wt(j) * f(-h / 2 + i * dx, j * dy);
  return acc * dx * dy / 9.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Weighted gradient and form norms
// ---------------------------------------------------------------------------

TEST_CASE("weighted gradient reproduces the hand examples") {
  const PlanarCoeffs unit = unit_planar_coeffs();
  for (Real x : {-0.2, 0.1}) {
    for (Real y : {0.3, 1.1}) {
      const Mat2 stretch = planar_gradient(field_xy(kX, s2_const(0.0)), unit, x, y);
      CHECK(stretch(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(stretch(0, 1)) + std::abs(stretch(1, 0)) + std::abs(stretch(1, 1)) <
            1e-14);

      const Mat2 spin =
          planar_gradient(field_xy(kY, s2_scale(-1.0, kX)), unit, x, y);
      CHECK(spin(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(spin(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
      const Mat2 e = 0.5 * (spin + spin.transpose());
      CHECK(e.cwiseAbs().maxCoeff() < 1e-14);

      const PlanarCoeffs cs = cross_section_coeffs(s1_const(1.0), s1_const(1.0));
      const Mat2 lift = planar_gradient(field_xy(s2_const(0.0), s2_const(1.0)), cs, x, y);
      CHECK(lift(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(std::abs(lift(0, 0)) + std::abs(lift(1, 0)) + std::abs(lift(1, 1)) < 1e-14);
    }
  }
}

TEST_CASE("form norms of polynomial fields have closed values") {
  const Real h = 0.5, p = 2.0;
  const PlanarForms stretch =
      planar_forms(field_xy(kX, s2_const(0.0)), unit_planar_coeffs(), h, p);
  CHECK(stretch.grad_sq == doctest::Approx(h * p).epsilon(1e-13));
  CHECK(stretch.sym_sq == doctest::Approx(h * p).epsilon(1e-13));
  CHECK(stretch.u_sq == doctest::Approx(p * h * h * h / 12).epsilon(1e-13));
  CHECK(stretch.v_sq == 0.0);

  const PlanarForms spin =
      planar_forms(field_xy(kY, s2_scale(-1.0, kX)), unit_planar_coeffs(), h, p);
  CHECK(spin.grad_sq == doctest::Approx(2 * h * p).epsilon(1e-13));
  CHECK(spin.sym_sq < 1e-14);
}

TEST_CASE("vanishing diagonal coefficients are rejected") {
  PlanarCoeffs c = unit_planar_coeffs();
  c.a1 = s1_poly({-1.0 / 3.0, 1.0});  // zero at y = 1/3, between scan samples
  CHECK(thrown_code([&] {
          planar_forms(field_xy(kX, s2_const(0.0)), c, 0.5, 1.0);
        }) == ErrorCode::CoeffVanishes);

  PlanarCoeffs c2 = unit_planar_coeffs();
  c2.a2 = s1_sin(2 * kPi, 0.0);  // zeros on [0, 1]
  CHECK(thrown_code([&] {
          planar_forms(field_xy(kX, s2_const(0.0)), c2, 0.5, 1.0);
        }) == ErrorCode::CoeffVanishes);
}

// ---------------------------------------------------------------------------
// First-and-a-half ratios
// ---------------------------------------------------------------------------

TEST_CASE("constant first component gives a zero ratio") {
  const PlanarField f = field_xy(s2_const(1.0), s2_const(0.0));
  CHECK(korn15_ratio(f, unit_planar_coeffs(), 0.5, 2.0) == 0.0);
}

TEST_CASE("declared edge conditions are enforced") {
  // u = y is not periodic on [0, p].
  CHECK(thrown_code([&] {
          korn15_ratio(field_xy(kY, s2_const(0.0)), unit_planar_coeffs(), 0.5, 2.0);
        }) == ErrorCode::VariantViolation);
  // v = x does not vanish on the lower edge.
  CHECK(thrown_code([&] {
          korn15_ratio(field_xy(s2_const(0.0), kX, PlanarVariant::DirichletV),
                       unit_planar_coeffs(), 0.5, 2.0);
        }) == ErrorCode::VariantViolation);
  // The zero field satisfies everything but has no denominator.
  CHECK(thrown_code([&] {
          korn15_ratio(field_xy(s2_const(0.0), s2_const(0.0)), unit_planar_coeffs(),
                       0.5, 2.0);
        }) == ErrorCode::ZeroDenominator);
}

TEST_CASE("ratios agree with an independent quadrature") {
  const Real h = 0.1, p = 1.3;
  PlanarCoeffs c;
  c.a1 = s1_poly({1.0, 0.0, 0.5});
  c.b1 = s1_sin(2.0, 0.4);
  c.a2 = s1_poly({2.0, -0.3});
  c.b2 = s1_cos(1.0, 0.0);

  const PlanarField f = random_planar_field(42, PlanarVariant::PeriodicU, p);
  const auto forms_at = [&](Real x, Real y, Real* u_sq, Real* grad, Real* sym) {
    const Real u = f.u->deriv(0, 0, x, y), v = f.v->deriv(0, 0, x, y);
    const Real g00 = f.u->deriv(1, 0, x, y);
    const Real g01 = c.a1->deriv(0, y) * f.u->deriv(0, 1, x, y) + c.b1->deriv(0, y) * v;
    const Real g10 = f.v->deriv(1, 0, x, y);
    const Real g11 = c.a2->deriv(0, y) * f.v->deriv(0, 1, x, y) + c.b2->deriv(0, y) * u;
    const Real off = 0.5 * (g01 + g10);
    *u_sq = u * u;
    *grad = g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11;
    *sym = g00 * g00 + 2 * off * off + g11 * g11;
    return u * u + v * v;
  };
  Real scratch[3];
  const Real phi2 = simpson2(
      h, p, 512, [&](Real x, Real y) { return forms_at(x, y, scratch, scratch + 1, scratch + 2); });
  const Real u2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    forms_at(x, y, &uu, &gg, &ee);
    return uu;
  });
  const Real g2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    forms_at(x, y, &uu, &gg, &ee);
    return gg;
  });
  const Real e2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    forms_at(x, y, &uu, &gg, &ee);
    return ee;
  });
  const Real oracle = g2 / (std::sqrt(u2 * e2) / h + e2 + phi2);
  const Real got = korn15_ratio(f, c, h, p);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-8));

  // Same cross-validation for the edge-clamped flavor (plain Cartesian forms).
  const PlanarField d = random_planar_field(7, PlanarVariant::DirichletV, p);
  Real du2 = 0, dg2 = 0, de2 = 0;
  const auto cart = [&](Real x, Real y, Real* uu, Real* gg, Real* ee) {
    const Real g00 = d.u->deriv(1, 0, x, y), g01 = d.u->deriv(0, 1, x, y);
    const Real g10 = d.v->deriv(1, 0, x, y), g11 = d.v->deriv(0, 1, x, y);
    const Real off = 0.5 * (g01 + g10);
    *uu = d.u->deriv(0, 0, x, y) * d.u->deriv(0, 0, x, y);
    *gg = g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11;
    *ee = g00 * g00 + 2 * off * off + g11 * g11;
  };
  du2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    cart(x, y, &uu, &gg, &ee);
    return uu;
  });
  dg2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    cart(x, y, &uu, &gg, &ee);
    return gg;
  });
  de2 = simpson2(h, p, 512, [&](Real x, Real y) {
    Real uu, gg, ee;
    cart(x, y, &uu, &gg, &ee);
    return ee;
  });
  const Real d_oracle = dg2 / (std::sqrt(de2) * (std::sqrt(du2) / h + std::sqrt(de2)));
  CHECK(korn15_ratio(d, unit_planar_coeffs(), h, p) ==
        doctest::Approx(d_oracle).epsilon(1e-8));
}

TEST_CASE("planar gradient matches the shell thickness-length cross-section") {
  // Shell with A_z = 2z; the (t, z) block of the simplified shell gradient is
  // the weighted planar gradient with a1 = a2 = 1/A_z(y), b1 = b2 = 0.
  const ZeroGaussSurface s =
      build_surface(make_profile(s1_poly({0.0, 0.0, 1.0})), constant_profile(0.0),
                    constant_profile(1.0), constant_profile(1.0), 2 * kPi,
                    Interval{0.5, 1.5});
  DisplacementField shell;
  shell.u_t = component_tz(s2_from_y(s1_sin(2.0, 0.3)), s2_from_y(s1_poly({0.2, 1.0})));
  shell.u_z = component_tz(s2_from_y(s1_cos(1.0, 0.0)), s2_from_y(s1_poly({0.0, -0.4})));

  PlanarField f;
  const Smooth2Ptr t_lin = kX;
  f.u = s2_sum(s2_from_y(s1_sin(2.0, 0.3)),
               s2_prod(t_lin, s2_from_y(s1_poly({0.2, 1.0}))));
  f.v = s2_sum(s2_from_y(s1_cos(1.0, 0.0)),
               s2_prod(t_lin, s2_from_y(s1_poly({0.0, -0.4}))));
  PlanarCoeffs c = unit_planar_coeffs();
  c.a1 = s1_quot(s1_const(1.0), s1_poly({0.0, 2.0}));
  c.a2 = c.a1;

  const Real h = 0.2;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const Real t = -h / 2 + h * Real(i) / 4.0;
      const Real z = 0.6 + 0.8 * Real(j) / 4.0;
      const Mat2 g2 = planar_gradient(f, c, t, z);
      const FrameTensor g3 = gradient(s, shell, t, 1.0, z, GradientKind::Simplified);
      CHECK(std::abs(g2(0, 0) - g3(0, 0)) < 1e-10);
      CHECK(std::abs(g2(0, 1) - g3(0, 2)) < 1e-10);
      CHECK(std::abs(g2(1, 0) - g3(2, 0)) < 1e-10);
      CHECK(std::abs(g2(1, 1) - g3(2, 2)) < 1e-10);
    }
}

TEST_CASE("edge-clamped ratios stay bounded as the strip thins") {
  const Real p = 1.0;
  const std::vector<Real> hs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<Real> max_ratio(hs.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const PlanarField f = random_planar_field(seed, PlanarVariant::DirichletV, p);
    for (std::size_t k = 0; k < hs.size(); ++k)
      max_ratio[k] =
          std::max(max_ratio[k], korn15_ratio(f, unit_planar_coeffs(), hs[k], p));
  }
  for (std::size_t k = 1; k < hs.size(); ++k)
    CHECK(max_ratio[k] <= 1.25 * max_ratio[0]);
  CHECK(max_ratio[0] > 0.0);
}

// ---------------------------------------------------------------------------
// Harmonic extension
// ---------------------------------------------------------------------------

TEST_CASE("linear boundary data extend to themselves") {
  const PlanarGrid g = harmonic_extension(kX, 0.5, 1.5, 16, 24);
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 24; ++j) CHECK(std::abs(g.w(i, j) - g.x(i)) < 1e-10);
  CHECK(laplace_residual(g) < 1e-6);
}

TEST_CASE("extension obeys the maximum principle and is not the square") {
  const Smooth2Ptr x_sq = s2_from_x(s1_poly({0.0, 0.0, 1.0}));
  const Real h = 1.0, p = 1.0;
  const PlanarGrid g = harmonic_extension(x_sq, h, p, 24, 24);
  Real bmin = std::numeric_limits<Real>::max(), bmax = -bmin;
  for (int i = 0; i <= 24; ++i)
    for (int j = 0; j <= 24; ++j)
      if (i == 0 || i == 24 || j == 0 || j == 24) {
        bmin = std::min(bmin, g.w(i, j));
        bmax = std::max(bmax, g.w(i, j));
      }
  for (int i = 1; i < 24; ++i)
    for (int j = 1; j < 24; ++j) {
      CHECK(g.w(i, j) >= bmin - 1e-12);
      CHECK(g.w(i, j) <= bmax + 1e-12);
    }
  // x^2 is subharmonic, so the interior must sit strictly above it somewhere.
  CHECK(std::abs(g.w(12, 12) - g.x(12) * g.x(12)) > 1e-3);
}

TEST_CASE("harmonic polynomials are reproduced at second order") {
  // Quadratic harmonics are exact for the 5-point stencil.
  const Smooth2Ptr saddle =
      s2_sum(s2_from_x(s1_poly({0.0, 0.0, 1.0})),
             s2_from_y(s1_poly({0.0, 0.0, -1.0})));
  const PlanarGrid ge = harmonic_extension(saddle, 1.0, 1.0, 16, 16);
  Real worst = 0;
  for (int i = 1; i < 16; ++i)
    for (int j = 1; j < 16; ++j)
      worst = std::max(worst,
                       std::abs(ge.w(i, j) - (ge.x(i) * ge.x(i) - ge.y(j) * ge.y(j))));
  CHECK(worst < 1e-9);

  // A quartic harmonic shows the O(dx^2) truncation decaying under refinement.
  const auto quartic = [](Real x, Real y) {
    return x * x * x * x - 6 * x * x * y * y + y * y * y * y;
  };
  const Smooth2Ptr w4 = s2_sum(
      s2_sum(s2_from_x(s1_poly({0.0, 0.0, 0.0, 0.0, 1.0})),
             s2_from_y(s1_poly({0.0, 0.0, 0.0, 0.0, 1.0}))),
      s2_scale(-6.0, s2_prod(s2_from_x(s1_poly({0.0, 0.0, 1.0})),
                             s2_from_y(s1_poly({0.0, 0.0, 1.0})))));
  Real err[2] = {0, 0};
  const int sizes[2] = {16, 32};
  for (int k = 0; k < 2; ++k) {
    const PlanarGrid g = harmonic_extension(w4, 1.0, 1.0, sizes[k], sizes[k]);
    for (int i = 1; i < sizes[k]; ++i)
      for (int j = 1; j < sizes[k]; ++j)
        err[k] = std::max(err[k], std::abs(g.w(i, j) - quartic(g.x(i), g.y(j))));
  }
  CHECK(err[0] / err[1] > 3.2);
  CHECK(err[0] / err[1] < 4.8);
}

TEST_CASE("starved iteration budget reports non-convergence") {
  const Smooth2Ptr x_sq = s2_from_x(s1_poly({0.0, 0.0, 1.0}));
  CHECK(thrown_code([&] { harmonic_extension(x_sq, 1.0, 1.0, 16, 16, 2); }) ==
        ErrorCode::NonConvergence);
}

TEST_CASE("extension minimizes the discrete gradient energy") {
  const Smooth2Ptr bdry =
      s2_sum(s2_from_x(s1_poly({0.0, 0.0, 1.0})), s2_from_y(s1_sin(2 * kPi, 0.0)));
  const int n = 20;
  const Real h = 1.0, p = 1.0;
  const PlanarGrid g = harmonic_extension(bdry, h, p, n, n);
  const Real hx = h / n, hy = p / n;
  const auto energy = [&](const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& w) {
    Real acc = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= n; ++j)
        acc += (w(i + 1, j) - w(i, j)) * (w(i + 1, j) - w(i, j)) * hy / hx;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < n; ++j)
        acc += (w(i, j + 1) - w(i, j)) * (w(i, j + 1) - w(i, j)) * hx / hy;
    return acc;
  };
  const Real base = energy(g.w);
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    auto perturbed = g.w;
    for (int m = 0; m < 5; ++m) {
      const int i = 1 + int(rng() % (n - 1)), j = 1 + int(rng() % (n - 1));
      perturbed(i, j) += ((rng() >> 11) * 0x1.0p-53 - 0.5) * 0.2;
    }
    CHECK(energy(perturbed) > base);
  }
}

// ---------------------------------------------------------------------------
// Sharp harmonic inequality
// ---------------------------------------------------------------------------

TEST_CASE("linear-in-thickness field realizes the closed-form gap") {
  const Real h = 0.3, p = 1.7;
  CHECK(harmonic_gap(kX, h, p) == doctest::Approx(2 * h * p).epsilon(1e-12));
  CHECK(harmonic_gap(s2_const(5.0), h, p) == 0.0);
}

TEST_CASE("non-harmonic or unconditioned fields are refused") {
  CHECK(thrown_code([&] {
          harmonic_gap(s2_from_x(s1_poly({0.0, 0.0, 1.0})), 0.5, 1.0);
        }) == ErrorCode::NotHarmonic);
  // x + y is harmonic but satisfies none of the admissible edge conditions.
  CHECK(thrown_code([&] { harmonic_gap(s2_sum(kX, kY), 0.5, 1.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("separable harmonic family keeps a nonnegative gap") {
  const Real p = 1.0;
  PlanarQuadrature q;
  q.nx_nodes = 8;
  q.nx_panels = 32;
  q.ny_nodes = 8;
  q.ny_panels = 32;
  int instances = 0;
  for (int n = 1; n <= 8; ++n) {
    const Real k = 2 * kPi * n / p;
    const Smooth1Ptr ch = parse_expression("cosh(" + num(k) + "*x)", "x");
    const Smooth1Ptr sh = parse_expression("sinh(" + num(k) + "*x)", "x");
    const std::vector<Smooth2Ptr> family = {
        s2_sep(ch, s1_cos(k, 0.0)), s2_sep(ch, s1_sin(k, 0.0)),
        s2_sep(sh, s1_cos(k, 0.0)), s2_sep(sh, s1_sin(k, 0.0))};
    for (const Smooth2Ptr& w : family) {
      for (int e = 0; e <= 6; ++e) {
        const Real h = std::pow(0.5, e);  // 1, 1/2, ..., 1/64
        CHECK(harmonic_gap(w, h, p, q) >= -1e-10);
        ++instances;
      }
    }
  }
  CHECK(instances >= 50);
}
