#pragma once

#include <array>
#include <vector>

namespace fdc {

/// Quadrature node on the reference triangle in barycentric coordinates.
/// Weights sum to 1/2 (the reference area); physical-element weights are
/// obtained by multiplying with twice the element area.
struct TriQuadPoint {
  double l1, l2, l3, w;
};

/// Conical-product Gauss rule, exact for polynomials of total degree <= 2n-2.
std::vector<TriQuadPoint> triangle_rule(int n);

/// Default assembly rule, exact to degree 8.
const std::vector<TriQuadPoint>& triangle_rule_deg8();

/// Gauss point on the reference edge [0,1]; weights sum to 1.
struct EdgeQuadPoint {
  double t, w;
};

/// 3-point Gauss rule on [0,1], exact to degree 5.
const std::array<EdgeQuadPoint, 3>& edge_rule();

}  // namespace fdc
