#include "kslab/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace kslab {

namespace {

// Uniform double in [-1, 1) from the top 53 bits of the generator, so the
// stream is identical across standard library implementations.
Real symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

void check_domain(Real h, Real p) {
  if (!(h > 0) || !(p > 0))
    fail(ErrorCode::InvalidArgument, "strip dimensions h and p must be positive");
}

// a1 and a2 must stay away from zero on [0, p]; a sign flip between adjacent
// samples pins a zero of the continuous coefficient strictly between them.
void check_coeffs(const PlanarCoeffs& c, Real p) {
  for (const Smooth1Ptr& a : {c.a1, c.a2}) {
    constexpr int kSamples = 256;
    Real min_a = std::numeric_limits<Real>::max(), max_a = 0;
    bool flips = false;
    Real prev = 0;
    for (int i = 0; i <= kSamples; ++i) {
      const Real y = p * Real(i) / Real(kSamples);
      const Real v = a->deriv(0, y);
      min_a = std::min(min_a, std::abs(v));
      max_a = std::max(max_a, std::abs(v));
      if (i > 0 && ((prev < 0 && v > 0) || (prev > 0 && v < 0))) flips = true;
      prev = v;
    }
    if (flips || min_a <= 1e-14 * std::max(max_a, Real(1)))
      fail(ErrorCode::CoeffVanishes,
           "diagonal coefficient vanishes on [0, p]; the weighted gradient "
           "degenerates");
  }
}

struct FormAccumulator {
  Real grad_sq = 0, sym_sq = 0, u_sq = 0, v_sq = 0;
};

FormAccumulator accumulate_forms(const PlanarField& f, const PlanarCoeffs& c, Real h,
                                 Real p, const PlanarQuadrature& q) {
  const Rule1D rx = gauss_legendre_panels(q.nx_nodes, q.nx_panels, -h / 2, h / 2);
  const Rule1D ry = gauss_legendre_panels(q.ny_nodes, q.ny_panels, 0.0, p);
  FormAccumulator acc;
  DTable tu, tv;
  for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
    const Real y = ry.nodes[j];
    const Real a1 = c.a1->deriv(0, y), b1 = c.b1->deriv(0, y);
    const Real a2 = c.a2->deriv(0, y), b2 = c.b2->deriv(0, y);
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      const Real x = rx.nodes[i];
      const Real w = rx.weights[i] * ry.weights[j];
      f.u->derivs(x, y, 1, 1, tu);
      f.v->derivs(x, y, 1, 1, tv);
      const Real g00 = tu(1, 0);
      const Real g01 = a1 * tu(0, 1) + b1 * tv(0, 0);
      const Real g10 = tv(1, 0);
      const Real g11 = a2 * tv(0, 1) + b2 * tu(0, 0);
      const Real off = 0.5 * (g01 + g10);
      acc.grad_sq += w * (g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11);
      acc.sym_sq += w * (g00 * g00 + 2 * off * off + g11 * g11);
      acc.u_sq += w * tu(0, 0) * tu(0, 0);
      acc.v_sq += w * tv(0, 0) * tv(0, 0);
    }
  }
  return acc;
}

void check_variant(const PlanarField& f, Real h, Real p) {
  constexpr int kSamples = 33;
  constexpr Real kTol = 1e-10;
  Real worst = 0, scale = 1;
  for (int i = 0; i < kSamples; ++i) {
    const Real x = -h / 2 + h * Real(i) / Real(kSamples - 1);
    if (f.variant == PlanarVariant::PeriodicU) {
      const Real lo = f.u->deriv(0, 0, x, 0.0), hi = f.u->deriv(0, 0, x, p);
      worst = std::max(worst, std::abs(hi - lo));
      scale = std::max({scale, std::abs(lo), std::abs(hi)});
    } else {
      const Real v0 = f.v->deriv(0, 0, x, 0.0);
      worst = std::max(worst, std::abs(v0));
      scale = std::max(scale, std::abs(f.v->deriv(0, 0, x, p / 2)));
    }
  }
  if (worst > kTol * scale)
    fail(ErrorCode::VariantViolation,
         f.variant == PlanarVariant::PeriodicU
             ? "u component is not p-periodic in y at sampled boundary points"
             : "v component does not vanish on the lower edge y = 0");
}

}  // namespace

PlanarCoeffs unit_planar_coeffs() {
  return PlanarCoeffs{s1_const(1.0), s1_const(0.0), s1_const(1.0), s1_const(0.0)};
}

PlanarCoeffs cross_section_coeffs(Smooth1Ptr alpha, Smooth1Ptr kappa) {
  PlanarCoeffs c;
  c.a1 = alpha;
  c.b1 = s1_scale(-1.0, kappa);
  c.a2 = std::move(alpha);
  c.b2 = std::move(kappa);
  return c;
}

Mat2 planar_gradient(const PlanarField& f, const PlanarCoeffs& c, Real x, Real y) {
  DTable tu, tv;
  f.u->derivs(x, y, 1, 1, tu);
  f.v->derivs(x, y, 1, 1, tv);
  Mat2 g;
  g(0, 0) = tu(1, 0);
  g(0, 1) = c.a1->deriv(0, y) * tu(0, 1) + c.b1->deriv(0, y) * tv(0, 0);
  g(1, 0) = tv(1, 0);
  g(1, 1) = c.a2->deriv(0, y) * tv(0, 1) + c.b2->deriv(0, y) * tu(0, 0);
  return g;
}

PlanarForms planar_forms(const PlanarField& f, const PlanarCoeffs& c, Real h, Real p,
                         const PlanarQuadrature& q) {
  check_domain(h, p);
  check_coeffs(c, p);
  const FormAccumulator acc = accumulate_forms(f, c, h, p, q);
  return PlanarForms{acc.grad_sq, acc.sym_sq, acc.u_sq, acc.v_sq};
}

Real korn15_ratio(const PlanarField& f, const PlanarCoeffs& c, Real h, Real p,
                  const PlanarQuadrature& q) {
  check_domain(h, p);
  check_variant(f, h, p);
  Real num = 0, den = 0;
  if (f.variant == PlanarVariant::PeriodicU) {
    check_coeffs(c, p);
    const FormAccumulator a = accumulate_forms(f, c, h, p, q);
    num = a.grad_sq;
    den = std::sqrt(a.u_sq * a.sym_sq) / h + a.sym_sq + a.u_sq + a.v_sq;
  } else {
    // The one-edge-clamped inequality is stated for the plain Cartesian
    // gradient; the coefficient functions do not enter.
    const FormAccumulator a = accumulate_forms(f, unit_planar_coeffs(), h, p, q);
    const Real e = std::sqrt(a.sym_sq);
    num = a.grad_sq;
    den = e * (std::sqrt(a.u_sq) / h + e);
  }
  if (!(den > 0)) fail(ErrorCode::ZeroDenominator, "first-and-a-half denominator vanishes");
  return num / den;
}

PlanarGrid harmonic_extension(const Smooth2Ptr& g, Real h, Real p, int nx, int ny,
                              int max_iterations) {
  check_domain(h, p);
  if (nx < 2 || ny < 2)
    fail(ErrorCode::InvalidArgument, "harmonic extension grid needs nx, ny >= 2");

  PlanarGrid grid;
  grid.h = h;
  grid.p = p;
  grid.w.setZero(nx + 1, ny + 1);
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      if (i == 0 || i == nx || j == 0 || j == ny) {
        const Real v = g->deriv(0, 0, grid.x(i), grid.y(j));
        if (!std::isfinite(v))
          fail(ErrorCode::InvalidArgument, "boundary data must be finite");
        grid.w(i, j) = v;
      }

  const int mi = nx - 1, mj = ny - 1;  // interior extent
  const std::ptrdiff_t n = std::ptrdiff_t(mi) * mj;
  const Real cx = Real(nx) * nx / (h * h);  // 1/dx^2
  const Real cy = Real(ny) * ny / (p * p);  // 1/dy^2
  const Real diag = 2 * (cx + cy);

  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  const auto idx = [mi](int i, int j) { return std::ptrdiff_t(i - 1) + std::ptrdiff_t(mi) * (j - 1); };

  // Negative 5-point Laplacian on the interior, zero-extended at the edges.
  const auto apply = [&](const Vec& in, Vec& out) {
    for (int j = 1; j <= mj; ++j)
      for (int i = 1; i <= mi; ++i) {
        const std::ptrdiff_t k = idx(i, j);
        Real v = diag * in[k];
        if (i > 1) v -= cx * in[k - 1];
        if (i < mi) v -= cx * in[k + 1];
        if (j > 1) v -= cy * in[k - mi];
        if (j < mj) v -= cy * in[k + mi];
        out[k] = v;
      }
  };

  Vec b = Vec::Zero(n);
  for (int j = 1; j <= mj; ++j)
    for (int i = 1; i <= mi; ++i) {
      Real v = 0;
      if (i == 1) v += cx * grid.w(0, j);
      if (i == mi) v += cx * grid.w(nx, j);
      if (j == 1) v += cy * grid.w(i, 0);
      if (j == mj) v += cy * grid.w(i, ny);
      b[idx(i, j)] = v;
    }

  Vec x = Vec::Zero(n), r = b, d = b, q_vec = Vec::Zero(n);
  const Real b_norm = b.norm();
  if (b_norm > 0) {
    const Real target = 1e-12 * b_norm;
    const int budget = max_iterations > 0 ? max_iterations : int(10 * n + 100);
    Real rr = r.squaredNorm();
    int iter = 0;
    while (std::sqrt(rr) > target) {
      if (iter++ >= budget)
        fail(ErrorCode::NonConvergence,
             "conjugate gradient exhausted its iteration budget");
      apply(d, q_vec);
      const Real alpha = rr / d.dot(q_vec);
      x += alpha * d;
      r -= alpha * q_vec;
      const Real rr_next = r.squaredNorm();
      d = r + (rr_next / rr) * d;
      rr = rr_next;
    }
  }
  for (int j = 1; j <= mj; ++j)
    for (int i = 1; i <= mi; ++i) grid.w(i, j) = x[idx(i, j)];
  return grid;
}

Real laplace_residual(const PlanarGrid& grid) {
  const int nx = int(grid.w.rows()) - 1, ny = int(grid.w.cols()) - 1;
  const Real cx = Real(nx) * nx / (grid.h * grid.h);
  const Real cy = Real(ny) * ny / (grid.p * grid.p);
  Real worst = 0;
  for (int i = 1; i < nx; ++i)
    for (int j = 1; j < ny; ++j) {
      const Real lap = cx * (grid.w(i + 1, j) - 2 * grid.w(i, j) + grid.w(i - 1, j)) +
                       cy * (grid.w(i, j + 1) - 2 * grid.w(i, j) + grid.w(i, j - 1));
      worst = std::max(worst, std::abs(lap));
    }
  return worst;
}

Real harmonic_gap(const Smooth2Ptr& w, Real h, Real p, const PlanarQuadrature& q) {
  check_domain(h, p);

  // Certification: the analytic Laplacian must vanish relative to the
  // second-derivative scale of the field over the whole strip.  The scale is
  // global, not pointwise: near interior zeros of w_xx the two derivative
  // paths cancel only to absolute accuracy set by the largest terms, so a
  // pointwise quotient would reject fields that are harmonic to working
  // precision.
  constexpr int kSamples = 33;
  Real lap_worst = 0, lap_scale = 1, field_scale = 1;
  for (int i = 0; i < kSamples; ++i)
    for (int j = 0; j < kSamples; ++j) {
      const Real x = -h / 2 + h * Real(i) / Real(kSamples - 1);
      const Real y = p * Real(j) / Real(kSamples - 1);
      const Real wxx = w->deriv(2, 0, x, y), wyy = w->deriv(0, 2, x, y);
      lap_worst = std::max(lap_worst, std::abs(wxx + wyy));
      lap_scale = std::max(lap_scale, std::abs(wxx) + std::abs(wyy));
      field_scale = std::max(field_scale, std::abs(w->deriv(0, 0, x, y)));
    }
  if (lap_worst > 1e-8 * lap_scale)
    fail(ErrorCode::NotHarmonic, "field has a nonzero Laplacian on the strip");

  // One of the admissible edge conditions must hold: periodicity in y, or a
  // vanishing trace on one of the horizontal edges.  Traces count as zero when
  // they are small relative to the field's size over the strip, which is the
  // resolution a trace of a large field can vanish to in floating point.
  Real d_per = 0, d_lo = 0, d_hi = 0;
  for (int i = 0; i < kSamples; ++i) {
    const Real x = -h / 2 + h * Real(i) / Real(kSamples - 1);
    const Real lo = w->deriv(0, 0, x, 0.0), hi = w->deriv(0, 0, x, p);
    d_per = std::max(d_per, std::abs(hi - lo));
    d_lo = std::max(d_lo, std::abs(lo));
    d_hi = std::max(d_hi, std::abs(hi));
  }
  if (std::min({d_per, d_lo, d_hi}) > 1e-8 * field_scale)
    fail(ErrorCode::InvalidArgument,
         "harmonic field satisfies none of the admissible edge conditions");

  const Rule1D rx = gauss_legendre_panels(q.nx_nodes, q.nx_panels, -h / 2, h / 2);
  const Rule1D ry = gauss_legendre_panels(q.ny_nodes, q.ny_panels, 0.0, p);
  Real w_sq = 0, wx_sq = 0, wy_sq = 0;
  DTable t;
  for (std::size_t j = 0; j < ry.nodes.size(); ++j)
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      const Real wt = rx.weights[i] * ry.weights[j];
      w->derivs(rx.nodes[i], ry.nodes[j], 1, 1, t);
      w_sq += wt * t(0, 0) * t(0, 0);
      wx_sq += wt * t(1, 0) * t(1, 0);
      wy_sq += wt * t(0, 1) * t(0, 1);
    }
  return 2 * std::sqrt(3.0) / h * std::sqrt(w_sq * wx_sq) + wx_sq - wy_sq;
}

PlanarField random_planar_field(std::uint64_t seed, PlanarVariant variant, Real p,
                                int n_modes, int degree) {
  if (n_modes < 1 || degree < 0)
    fail(ErrorCode::InvalidArgument, "random field needs n_modes >= 1, degree >= 0");
  std::mt19937_64 rng(seed);

  const auto random_poly = [&] {
    std::vector<Real> coeffs(degree + 1);
    for (Real& c : coeffs) c = symmetric_uniform(rng);
    return s1_poly(std::move(coeffs));
  };
  // Sum of x-polynomial times y-mode terms; the caller supplies the modes.
  const auto build = [&](const std::vector<Smooth1Ptr>& modes) {
    Smooth2Ptr acc = s2_const(0.0);
    for (const Smooth1Ptr& m : modes) acc = s2_sum(acc, s2_sep(random_poly(), m));
    return acc;
  };

  std::vector<Smooth1Ptr> periodic, halfwave, sine;
  periodic.push_back(s1_const(1.0));
  for (int k = 1; k <= n_modes; ++k) {
    periodic.push_back(s1_harmonic(1.0, 2 * kPi * k / p, 2 * kPi * symmetric_uniform(rng)));
    halfwave.push_back(s1_harmonic(1.0, kPi * k / p, 2 * kPi * symmetric_uniform(rng)));
    sine.push_back(s1_sin(kPi * k / p, 0.0));
  }

  PlanarField f;
  f.variant = variant;
  if (variant == PlanarVariant::PeriodicU) {
    f.u = build(periodic);
    f.v = build(periodic);
  } else {
    f.u = build(halfwave);
    f.v = build(sine);  // vanishes at y = 0 (and y = p)
  }
  return f;
}

}  // namespace kslab
