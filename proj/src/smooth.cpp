#include "kslab/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace kslab {

namespace {

void require_order(int order) {
  if (order < 0 || order > 2 * kMaxDerivOrder)
    fail(ErrorCode::InvalidArgument,
         "derivative order " + std::to_string(order) + " out of supported range");
}

// --------------------------- 1D leaves ------------------------------------

class ConstS1 final : public Smooth1 {
 public:
  explicit ConstS1(Real c) : c_(c) {}
  Real deriv(int order, Real) const override { return order == 0 ? c_ : 0.0; }

 private:
  Real c_;
};

class PolyS1 final : public Smooth1 {
 public:
  explicit PolyS1(std::vector<Real> c) : c_(std::move(c)) {}
  Real deriv(int order, Real x) const override {
    require_order(order);
    const int n = static_cast<int>(c_.size());
    if (order >= n) return 0.0;
    // Horner on the derivative's coefficients c_k * k!/(k-order)!; each term
    // picks up exactly (k - order) factors of x on the way down.
    Real acc = 0.0;
    for (int k = n - 1; k >= order; --k) {
      Real fall = 1.0;
      for (int m = 0; m < order; ++m) fall *= static_cast<Real>(k - m);
      acc = acc * x + fall * c_[k];
    }
    return acc;
  }

 private:
  std::vector<Real> c_;
};

class HarmonicS1 final : public Smooth1 {
 public:
  HarmonicS1(Real amp, Real freq, Real phase) : amp_(amp), freq_(freq), phase_(phase) {}
  Real deriv(int order, Real x) const override {
    require_order(order);
    return amp_ * std::pow(freq_, order) *
           std::cos(freq_ * x + phase_ + order * (kPi / 2));
  }

 private:
  Real amp_, freq_, phase_;
};

// exp(-1/(1-s^2)) with derivatives generated through the closed algebra
// spanned by b(s) * s^i * q^j, q = 1/(1-s^2):  q' = 2 s q^2, b' = -2 s q^2 b.
class BumpS1 final : public Smooth1 {
 public:
  BumpS1(Real center, Real halfwidth) : center_(center), halfwidth_(halfwidth) {
    if (halfwidth <= 0.0)
      fail(ErrorCode::InvalidArgument, "bump halfwidth must be positive");
    polys_.resize(kMaxOrder + 1);
    polys_[0] = {{0, 0, 1.0}};
    for (int n = 0; n < kMaxOrder; ++n) {
      std::vector<Term> next;
      for (const Term& t : polys_[n]) {
        // d/ds [b s^i q^j] = b ( -2 s^{i+1} q^{j+2} + i s^{i-1} q^j
        //                        + 2 j s^{i+1} q^{j+1} )
        add(next, t.si + 1, t.qi + 2, -2.0 * t.c);
        if (t.si > 0) add(next, t.si - 1, t.qi, t.si * t.c);
        if (t.qi > 0) add(next, t.si + 1, t.qi + 1, 2.0 * t.qi * t.c);
      }
      polys_[n + 1] = std::move(next);
    }
  }

  Real deriv(int order, Real x) const override {
    require_order(order);
    if (order > kMaxOrder)
      fail(ErrorCode::InvalidArgument, "bump derivative order beyond precomputed table");
    const Real s = (x - center_) / halfwidth_;
    const Real one_minus = 1.0 - s * s;
    // Beyond this cut the bump and all tabulated derivatives are below 1e-40;
    // returning exact zeros avoids overflow in the rational prefactors.
    if (one_minus <= 5e-3) return 0.0;
    const Real q = 1.0 / one_minus;
    const Real b = std::exp(-q);
    Real acc = 0.0;
    for (const Term& t : polys_[order])
      acc += t.c * std::pow(s, t.si) * std::pow(q, t.qi);
    return acc * b / std::pow(halfwidth_, order);
  }

 private:
  struct Term {
    int si, qi;
    Real c;
  };
  static void add(std::vector<Term>& terms, int si, int qi, Real c) {
    for (Term& t : terms) {
      if (t.si == si && t.qi == qi) {
        t.c += c;
        return;
      }
    }
    terms.push_back({si, qi, c});
  }
  static constexpr int kMaxOrder = 2 * kMaxDerivOrder;

  Real center_, halfwidth_;
  std::vector<std::vector<Term>> polys_;
};

// --------------------------- 1D combinators -------------------------------

class SumS1 final : public Smooth1 {
 public:
  SumS1(Smooth1Ptr a, Smooth1Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  Real deriv(int order, Real x) const override {
    return a_->deriv(order, x) + b_->deriv(order, x);
  }

 private:
  Smooth1Ptr a_, b_;
};

class ScaleS1 final : public Smooth1 {
 public:
  ScaleS1(Real k, Smooth1Ptr f) : k_(k), f_(std::move(f)) {}
  Real deriv(int order, Real x) const override { return k_ * f_->deriv(order, x); }

 private:
  Real k_;
  Smooth1Ptr f_;
};

class ProdS1 final : public Smooth1 {
 public:
  ProdS1(Smooth1Ptr a, Smooth1Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  Real deriv(int order, Real x) const override {
    require_order(order);
    Real acc = 0.0;
    for (int k = 0; k <= order; ++k)
      acc += binomial(order, k) * a_->deriv(k, x) * b_->deriv(order - k, x);
    return acc;
  }

 private:
  Smooth1Ptr a_, b_;
};

class QuotS1 final : public Smooth1 {
 public:
  QuotS1(Smooth1Ptr a, Smooth1Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  Real deriv(int order, Real x) const override {
    require_order(order);
    std::vector<Real> fa(order + 1), fb(order + 1), q(order + 1);
    for (int k = 0; k <= order; ++k) {
      fa[k] = a_->deriv(k, x);
      fb[k] = b_->deriv(k, x);
    }
    if (std::abs(fb[0]) < 1e-300)
      fail(ErrorCode::ZeroDenominator, "quotient denominator vanishes at sample point");
    q[0] = fa[0] / fb[0];
    for (int m = 1; m <= order; ++m) {
      Real acc = fa[m];
      for (int k = 0; k < m; ++k) acc -= binomial(m, k) * q[k] * fb[m - k];
      q[m] = acc / fb[0];
    }
    return q[order];
  }

 private:
  Smooth1Ptr a_, b_;
};

class AffineArgS1 final : public Smooth1 {
 public:
  AffineArgS1(Smooth1Ptr f, Real alpha, Real beta)
      : f_(std::move(f)), alpha_(alpha), beta_(beta) {}
  Real deriv(int order, Real x) const override {
    return std::pow(alpha_, order) * f_->deriv(order, alpha_ * x + beta_);
  }

 private:
  Smooth1Ptr f_;
  Real alpha_, beta_;
};

class DerivS1 final : public Smooth1 {
 public:
  DerivS1(Smooth1Ptr f, int k) : f_(std::move(f)), k_(k) {}
  Real deriv(int order, Real x) const override { return f_->deriv(order + k_, x); }

 private:
  Smooth1Ptr f_;
  int k_;
};

// --------------------------- 2D nodes --------------------------------------

void check_block(int mx, int my) {
  if (mx < 0 || my < 0 || mx > kMaxDerivOrder || my > kMaxDerivOrder)
    fail(ErrorCode::InvalidArgument, "mixed-derivative order out of table range");
}

class FromXS2 final : public Smooth2 {
 public:
  explicit FromXS2(Smooth1Ptr f) : f_(std::move(f)) {}
  void derivs(Real x, Real, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    out.topLeftCorner(mx + 1, my + 1).setZero();
    for (int i = 0; i <= mx; ++i) out(i, 0) = f_->deriv(i, x);
  }

 private:
  Smooth1Ptr f_;
};

class FromYS2 final : public Smooth2 {
 public:
  explicit FromYS2(Smooth1Ptr f) : f_(std::move(f)) {}
  void derivs(Real, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    out.topLeftCorner(mx + 1, my + 1).setZero();
    for (int j = 0; j <= my; ++j) out(0, j) = f_->deriv(j, y);
  }

 private:
  Smooth1Ptr f_;
};

class SepS2 final : public Smooth2 {
 public:
  SepS2(Smooth1Ptr fx, Smooth1Ptr fy) : fx_(std::move(fx)), fy_(std::move(fy)) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    Real dx[kMaxDerivOrder + 1], dy[kMaxDerivOrder + 1];
    for (int i = 0; i <= mx; ++i) dx[i] = fx_->deriv(i, x);
    for (int j = 0; j <= my; ++j) dy[j] = fy_->deriv(j, y);
    for (int i = 0; i <= mx; ++i)
      for (int j = 0; j <= my; ++j) out(i, j) = dx[i] * dy[j];
  }

 private:
  Smooth1Ptr fx_, fy_;
};

class SumS2 final : public Smooth2 {
 public:
  SumS2(Smooth2Ptr a, Smooth2Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    DTable tb;
    a_->derivs(x, y, mx, my, out);
    b_->derivs(x, y, mx, my, tb);
    out.topLeftCorner(mx + 1, my + 1) += tb.topLeftCorner(mx + 1, my + 1);
  }

 private:
  Smooth2Ptr a_, b_;
};

class ScaleS2 final : public Smooth2 {
 public:
  ScaleS2(Real k, Smooth2Ptr f) : k_(k), f_(std::move(f)) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    f_->derivs(x, y, mx, my, out);
    out.topLeftCorner(mx + 1, my + 1) *= k_;
  }

 private:
  Real k_;
  Smooth2Ptr f_;
};

class ProdS2 final : public Smooth2 {
 public:
  ProdS2(Smooth2Ptr a, Smooth2Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    DTable ta, tb;
    a_->derivs(x, y, mx, my, ta);
    b_->derivs(x, y, mx, my, tb);
    for (int i = 0; i <= mx; ++i)
      for (int j = 0; j <= my; ++j) {
        Real acc = 0.0;
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l)
            acc += binomial(i, k) * binomial(j, l) * ta(k, l) * tb(i - k, j - l);
        out(i, j) = acc;
      }
  }

 private:
  Smooth2Ptr a_, b_;
};

class QuotS2 final : public Smooth2 {
 public:
  QuotS2(Smooth2Ptr a, Smooth2Ptr b) : a_(std::move(a)), b_(std::move(b)) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    DTable ta, tb;
    a_->derivs(x, y, mx, my, ta);
    b_->derivs(x, y, mx, my, tb);
    if (std::abs(tb(0, 0)) < 1e-300)
      fail(ErrorCode::ZeroDenominator, "quotient denominator vanishes at sample point");
    for (int i = 0; i <= mx; ++i)
      for (int j = 0; j <= my; ++j) {
        Real acc = ta(i, j);
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l) {
            if (k == i && l == j) continue;
            acc -= binomial(i, k) * binomial(j, l) * out(k, l) * tb(i - k, j - l);
          }
        out(i, j) = acc / tb(0, 0);
      }
  }

 private:
  Smooth2Ptr a_, b_;
};

class DxS2 final : public Smooth2 {
 public:
  DxS2(Smooth2Ptr f, int k) : f_(std::move(f)), k_(k) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx + k_, my);
    DTable t;
    f_->derivs(x, y, mx + k_, my, t);
    for (int i = 0; i <= mx; ++i)
      for (int j = 0; j <= my; ++j) out(i, j) = t(i + k_, j);
  }

 private:
  Smooth2Ptr f_;
  int k_;
};

class DyS2 final : public Smooth2 {
 public:
  DyS2(Smooth2Ptr f, int k) : f_(std::move(f)), k_(k) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my + k_);
    DTable t;
    f_->derivs(x, y, mx, my + k_, t);
    for (int i = 0; i <= mx; ++i)
      for (int j = 0; j <= my; ++j) out(i, j) = t(i, j + k_);
  }

 private:
  Smooth2Ptr f_;
  int k_;
};

class AffineXS2 final : public Smooth2 {
 public:
  AffineXS2(Smooth2Ptr f, Real alpha, Real beta)
      : f_(std::move(f)), alpha_(alpha), beta_(beta) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    f_->derivs(alpha_ * x + beta_, y, mx, my, out);
    Real pow_a = 1.0;
    for (int i = 0; i <= mx; ++i) {
      for (int j = 0; j <= my; ++j) out(i, j) *= pow_a;
      pow_a *= alpha_;
    }
  }

 private:
  Smooth2Ptr f_;
  Real alpha_, beta_;
};

class SupportBoxS2 final : public Smooth2 {
 public:
  SupportBoxS2(Smooth2Ptr f, Interval xb, Interval yb)
      : f_(std::move(f)), xb_(xb), yb_(yb) {}
  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    if (x <= xb_.lo || x >= xb_.hi || y <= yb_.lo || y >= yb_.hi) {
      out.topLeftCorner(mx + 1, my + 1).setZero();
      return;
    }
    f_->derivs(x, y, mx, my, out);
  }

 private:
  Smooth2Ptr f_;
  Interval xb_, yb_;
};

class GridSampledS2 final : public Smooth2 {
 public:
  GridSampledS2(Eigen::MatrixXd values, Real x_period, Interval y_range)
      : v_(std::move(values)),
        y_lo_(y_range.lo),
        dx_(x_period / Real(v_.rows())),
        dy_(y_range.length() / Real(v_.cols() - 1)) {
    const Eigen::Index nx = v_.rows(), ny = v_.cols();
    vx_.resize(nx, ny);
    vy_.resize(nx, ny);
    const auto wrap = [nx](Eigen::Index i) { return (i % nx + nx) % nx; };
    for (Eigen::Index j = 0; j < ny; ++j)
      for (Eigen::Index i = 0; i < nx; ++i)
        vx_(i, j) = (-v_(wrap(i + 2), j) + 8 * v_(wrap(i + 1), j) -
                     8 * v_(wrap(i - 1), j) + v_(wrap(i - 2), j)) /
                    (12 * dx_);
    for (Eigen::Index i = 0; i < nx; ++i)
      for (Eigen::Index j = 0; j < ny; ++j) {
        if (j == 0)
          vy_(i, j) = (-3 * v_(i, 0) + 4 * v_(i, 1) - v_(i, 2)) / (2 * dy_);
        else if (j == ny - 1)
          vy_(i, j) = (3 * v_(i, j) - 4 * v_(i, j - 1) + v_(i, j - 2)) / (2 * dy_);
        else if (j == 1 || j == ny - 2)
          vy_(i, j) = (v_(i, j + 1) - v_(i, j - 1)) / (2 * dy_);
        else
          vy_(i, j) = (-v_(i, j + 2) + 8 * v_(i, j + 1) - 8 * v_(i, j - 1) +
                       v_(i, j - 2)) /
                      (12 * dy_);
      }
  }

  void derivs(Real x, Real y, int mx, int my, DTable& out) const override {
    check_block(mx, my);
    if (mx + my > 1)
      fail(ErrorCode::InvalidArgument,
           "grid-sampled field carries value and first partials only; order (" +
               std::to_string(mx) + ", " + std::to_string(my) + ") requested");
    out.topLeftCorner(mx + 1, my + 1).setZero();
    out(0, 0) = interp(v_, x, y);
    if (mx == 1) out(1, 0) = interp(vx_, x, y);
    if (my == 1) out(0, 1) = interp(vy_, x, y);
  }

 private:
  // Local cubic through the four nodes bracketing the point, tensor-product in
  // the two directions; x wraps, the y stencil clamps at the boundary (which
  // extrapolates the boundary cubic for points nudged slightly outside).
  Real interp(const Eigen::MatrixXd& table, Real x, Real y) const {
    const Eigen::Index nx = table.rows(), ny = table.cols();
    const Real ux = x / dx_;
    const Real fx = ux - std::floor(ux);
    Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(ux)) % nx;
    if (i0 < 0) i0 += nx;
    Real uy = (y - y_lo_) / dy_;
    Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(uy));
    j0 = std::clamp<Eigen::Index>(j0, 1, ny - 3);
    const Real fy = uy - Real(j0);
    Real wx[4], wy[4];
    cubic_weights(fx, wx);
    cubic_weights(fy, wy);
    Real acc = 0.0;
    for (int a = -1; a <= 2; ++a) {
      const Eigen::Index i = ((i0 + a) % nx + nx) % nx;
      Real row = 0.0;
      for (int b = -1; b <= 2; ++b) row += wy[b + 1] * table(i, j0 + b);
      acc += wx[a + 1] * row;
    }
    return acc;
  }

  static void cubic_weights(Real f, Real w[4]) {
    w[0] = -f * (f - 1) * (f - 2) / 6;
    w[1] = (f + 1) * (f - 1) * (f - 2) / 2;
    w[2] = -(f + 1) * f * (f - 2) / 2;
    w[3] = (f + 1) * f * (f - 1) / 6;
  }

  Eigen::MatrixXd v_, vx_, vy_;
  Real y_lo_, dx_, dy_;
};

}  // namespace

Smooth1Ptr s1_const(Real c) { return std::make_shared<ConstS1>(c); }
Smooth1Ptr s1_poly(std::vector<Real> coeffs) {
  return std::make_shared<PolyS1>(std::move(coeffs));
}
Smooth1Ptr s1_harmonic(Real amp, Real freq, Real phase) {
  return std::make_shared<HarmonicS1>(amp, freq, phase);
}
Smooth1Ptr s1_cos(Real freq, Real phase) { return s1_harmonic(1.0, freq, phase); }
Smooth1Ptr s1_sin(Real freq, Real phase) {
  return s1_harmonic(1.0, freq, phase - kPi / 2);
}
Smooth1Ptr s1_bump(Real center, Real halfwidth) {
  return std::make_shared<BumpS1>(center, halfwidth);
}
Smooth1Ptr s1_sin_sq_window(Real a, Real b) {
  // sin^2(u) = 1/2 - cos(2u)/2 with u = pi (x - a) / (b - a).
  const Real freq = 2.0 * kPi / (b - a);
  return s1_sum(s1_const(0.5), s1_harmonic(-0.5, freq, -freq * a));
}

Smooth1Ptr s1_sum(Smooth1Ptr a, Smooth1Ptr b) {
  return std::make_shared<SumS1>(std::move(a), std::move(b));
}
Smooth1Ptr s1_scale(Real k, Smooth1Ptr f) {
  return std::make_shared<ScaleS1>(k, std::move(f));
}
Smooth1Ptr s1_prod(Smooth1Ptr a, Smooth1Ptr b) {
  return std::make_shared<ProdS1>(std::move(a), std::move(b));
}
Smooth1Ptr s1_quot(Smooth1Ptr a, Smooth1Ptr b) {
  return std::make_shared<QuotS1>(std::move(a), std::move(b));
}
Smooth1Ptr s1_affine_arg(Smooth1Ptr f, Real alpha, Real beta) {
  return std::make_shared<AffineArgS1>(std::move(f), alpha, beta);
}
Smooth1Ptr s1_deriv(Smooth1Ptr f, int k) {
  return std::make_shared<DerivS1>(std::move(f), k);
}

Smooth2Ptr s2_from_x(Smooth1Ptr f) { return std::make_shared<FromXS2>(std::move(f)); }
Smooth2Ptr s2_from_y(Smooth1Ptr f) { return std::make_shared<FromYS2>(std::move(f)); }
Smooth2Ptr s2_const(Real c) { return s2_from_x(s1_const(c)); }
Smooth2Ptr s2_sep(Smooth1Ptr fx, Smooth1Ptr fy) {
  return std::make_shared<SepS2>(std::move(fx), std::move(fy));
}
Smooth2Ptr s2_sum(Smooth2Ptr a, Smooth2Ptr b) {
  return std::make_shared<SumS2>(std::move(a), std::move(b));
}
Smooth2Ptr s2_scale(Real k, Smooth2Ptr f) {
  return std::make_shared<ScaleS2>(k, std::move(f));
}
Smooth2Ptr s2_prod(Smooth2Ptr a, Smooth2Ptr b) {
  return std::make_shared<ProdS2>(std::move(a), std::move(b));
}
Smooth2Ptr s2_quot(Smooth2Ptr a, Smooth2Ptr b) {
  return std::make_shared<QuotS2>(std::move(a), std::move(b));
}
Smooth2Ptr s2_dx(Smooth2Ptr f, int k) { return std::make_shared<DxS2>(std::move(f), k); }
Smooth2Ptr s2_dy(Smooth2Ptr f, int k) { return std::make_shared<DyS2>(std::move(f), k); }
Smooth2Ptr s2_affine_x(Smooth2Ptr f, Real alpha, Real beta) {
  return std::make_shared<AffineXS2>(std::move(f), alpha, beta);
}
Smooth2Ptr s2_support_box(Smooth2Ptr f, Interval x_box, Interval y_box) {
  return std::make_shared<SupportBoxS2>(std::move(f), x_box, y_box);
}
Smooth2Ptr s2_grid_sampled(const Eigen::MatrixXd& values, Real x_period,
                           Interval y_range) {
  if (values.rows() < 8 || values.cols() < 4)
    fail(ErrorCode::InvalidArgument,
         "grid-sampled field needs at least 8 x-columns and 4 y-rows");
  if (!(x_period > 0) || !(y_range.length() > 0))
    fail(ErrorCode::InvalidArgument, "grid-sampled field needs positive extents");
  if (!values.allFinite())
    fail(ErrorCode::InvalidArgument, "grid-sampled field has non-finite entries");
  return std::make_shared<GridSampledS2>(values, x_period, y_range);
}

}  // namespace kslab
