#include "fdc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fdc {

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
static void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess on [-1,1].
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

std::vector<TriQuadPoint> triangle_rule(int n) {
  if (n < 1) throw std::invalid_argument("triangle_rule: n must be positive");
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  // Duffy map of the unit square onto the reference triangle:
  // (xi, eta) -> (xi, eta (1 - xi)), Jacobian (1 - xi).
  std::vector<TriQuadPoint> rule;
  rule.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double px = x[i];
      const double py = x[j] * (1.0 - x[i]);
      rule.push_back({1.0 - px - py, px, py, w[i] * w[j] * (1.0 - x[i])});
    }
  }
  return rule;
}

const std::vector<TriQuadPoint>& triangle_rule_deg8() {
  static const std::vector<TriQuadPoint> rule = triangle_rule(5);
  return rule;
}

const std::array<EdgeQuadPoint, 3>& edge_rule() {
  static const std::array<EdgeQuadPoint, 3> rule = [] {
    const double s = std::sqrt(3.0 / 5.0);
    return std::array<EdgeQuadPoint, 3>{{{0.5 * (1.0 - s), 5.0 / 18.0},
                                         {0.5, 8.0 / 18.0},
                                         {0.5 * (1.0 + s), 5.0 / 18.0}}};
  }();
  return rule;
}

}  // namespace fdc
