#pragma once

#include <functional>
#include <vector>

#include "tdbem/types.hpp"

namespace tdbem {

// Gauss-Legendre rule on [0,1].
struct LineRule {
  std::vector<double> x;
  std::vector<double> w;
};

const LineRule& gauss_legendre(int n);

// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct TriangleRule {
  int degree = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
};

// exact for polynomials of total degree <= order, order in 1..20
const TriangleRule& gauss_triangle(int order);

// clamp(base - floor(log2(max(dist, h) / h)), 2, base)
int select_order(double dist, double h, int base = 6);

// Quadrature point on a physical triangle: reference coordinates (xi, eta),
// with y = a + xi (b - a) + eta (c - a), and the physical weight.
struct SurfacePoint {
  double xi;
  double eta;
  double w;
};

// Regular rule mapped to the triangle with the given area.
std::vector<SurfacePoint> regular_points(int order, double area);

// Duffy-transformed points for a singularity at x on the closed triangle
// (a,b,c): split into 1, 2 or 3 subtriangles at x, n x n Gauss-Legendre each.
std::vector<SurfacePoint> singular_points(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, int n);

// Same splitting from the point of the triangle closest to x, for x near
// but not on the triangle.
std::vector<SurfacePoint> near_singular_points(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, int n);

Complex duffy_singular(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c,
                       const std::function<Complex(const Vec3&)>& f, int n);

}  // namespace tdbem
