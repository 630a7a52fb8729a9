#pragma once

#include <cmath>
#include <vector>

#include "kslab/types.hpp"

namespace kslab {

// One-dimensional quadrature rule: sum_i weights[i] * f(nodes[i]).
struct Rule1D {
  std::vector<Real> nodes;
  std::vector<Real> weights;

  template <class F>
  Real integrate(F&& f) const {
    Real acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Gauss–Legendre nodes/weights on [-1, 1], computed by Newton iteration on
// P_n with the asymptotic Chebyshev initial guess.  Accurate to rounding for
// the modest orders used here.
inline Rule1D gauss_legendre_reference(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "quadrature order must be >= 1");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    Real dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
      Real p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    Real w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Gauss–Legendre rule mapped to [a, b].
inline Rule1D gauss_legendre(int n, Real a, Real b) {
  Rule1D ref = gauss_legendre_reference(n);
  const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    ref.nodes[i] = mid + half * ref.nodes[i];
    ref.weights[i] *= half;
  }
  return ref;
}

// Composite Gauss–Legendre over `panels` equal subintervals of [a, b].
inline Rule1D gauss_legendre_panels(int nodes_per_panel, int panels, Real a, Real b) {
  if (panels < 1) fail(ErrorCode::InvalidArgument, "panel count must be >= 1");
  Rule1D out;
  const Real width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    Rule1D panel = gauss_legendre(nodes_per_panel, a + p * width, a + (p + 1) * width);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

// Uniform rule for one full period [0, p): n equal weights p/n at j*p/n.
// For smooth periodic integrands this is the (spectrally accurate) trapezoid
// rule; the duplicate endpoint is dropped.
inline Rule1D periodic_trapezoid(int n, Real period) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "node count must be >= 1");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, period / n);
  for (int j = 0; j < n; ++j) rule.nodes[j] = j * period / n;
  return rule;
}

// Standard trapezoid rule with endpoints on [a, b] (n >= 2 nodes).
inline Rule1D trapezoid(int n, Real a, Real b) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "trapezoid rule needs >= 2 nodes");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, (b - a) / (n - 1));
  rule.weights.front() *= 0.5;
  rule.weights.back() *= 0.5;
  for (int j = 0; j < n; ++j) rule.nodes[j] = a + j * (b - a) / (n - 1);
  return rule;
}

}  // namespace kslab
