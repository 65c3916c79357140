#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tdbem/quadrature.hpp"

using namespace tdbem;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// integral of x^i y^j over the reference triangle
double monomial(int i, int j) { return factorial(i) * factorial(j) / factorial(i + j + 2); }

// integral of 1/r over a triangle with apex p, from the opposite edge:
// d (asinh(t2/d) - asinh(t1/d)) with d the edge distance, t the foot offsets
double apex_integral(const Vec3& p, const Vec3& q1, const Vec3& q2) {
  const Vec3 e = (q2 - q1).normalized();
  const Vec3 foot = q1 + e * e.dot(p - q1);
  const double d = (p - foot).norm();
  const double t1 = e.dot(q1 - foot);
  const double t2 = e.dot(q2 - foot);
  return d * (std::asinh(t2 / d) - std::asinh(t1 / d));
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1") {
  for (int n = 1; n <= 20; ++n) {
    const auto& g = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0.0;
      for (size_t q = 0; q < g.x.size(); ++q) acc += g.w[q] * std::pow(g.x[q], k);
      CHECK(std::abs(acc - 1.0 / (k + 1)) < 1e-14);
    }
  }
}

TEST_CASE("triangle rules are exact for monomials up to their order") {
  for (int order = 1; order <= 12; ++order) {
    const auto& r = gauss_triangle(order);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int i = 0; i <= order; ++i) {
      for (int j = 0; i + j <= order; ++j) {
        double acc = 0.0;
        for (size_t q = 0; q < r.points.size(); ++q) {
          acc += r.weights[q] * std::pow(r.points[q].x(), i) * std::pow(r.points[q].y(), j);
        }
        INFO("order " << order << " monomial " << i << "," << j);
        CHECK(std::abs(acc - monomial(i, j)) < 1e-13);
      }
    }
  }
  CHECK(gauss_triangle(1).points.size() == 1);
  CHECK(gauss_triangle(2).points.size() == 3);
  CHECK(gauss_triangle(4).points.size() == 6);
  CHECK(gauss_triangle(5).points.size() == 7);
  CHECK(gauss_triangle(6).points.size() == 12);
  CHECK_THROWS_AS(gauss_triangle(0), DomainError);
}

TEST_CASE("distance-adaptive order selection") {
  const double h = 0.25;
  CHECK(select_order(0.0, h) == 6);
  CHECK(select_order(0.2, h) == 6);
  CHECK(select_order(0.5, h) == 5);
  CHECK(select_order(1.0, h) == 4);
  CHECK(select_order(2.0, h) == 3);
  CHECK(select_order(4.0, h) == 2);
  CHECK(select_order(1e6, h) == 2);
  CHECK(select_order(10.0, h, 3) == 2);
  for (double d = 0.0; d < 10.0; d += 0.01) CHECK(select_order(d + 0.01, h) <= select_order(d, h));
}

TEST_CASE("Duffy rule at the right-angle vertex of the unit triangle") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  auto slp = [&](const Vec3& y) { return Complex(1.0 / (4 * std::numbers::pi * (y - a).norm())); };
  const double exact = std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0)) / (4 * std::numbers::pi);
  const Complex got = duffy_singular(a, a, b, c, slp, 4);
  CHECK(std::abs(got - exact) < 1e-13 * exact);
  CHECK(apex_integral(a, b, c) / (4 * std::numbers::pi) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("Duffy rule at interior and edge points against closed forms") {
  const Vec3 a(0.1, -0.2, 0.3), b(1.2, 0.1, 0.2), c(0.3, 0.9, 0.7);
  for (const Vec3& x : {Vec3((a + b + c) / 3.0), Vec3(0.2 * a + 0.5 * b + 0.3 * c), Vec3(0.5 * (a + b)),
                        Vec3(0.25 * b + 0.75 * c)}) {
    double exact = 0.0;
    for (const auto& [p, q] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
      const double area = 0.5 * (p - x).cross(q - x).norm();
      if (area > 1e-14) exact += apex_integral(x, p, q);
    }
    const Complex got = duffy_singular(x, a, b, c, [&](const Vec3& y) { return Complex(1.0 / (y - x).norm()); }, 4);
    CHECK(std::abs(got.real() - exact) < 1e-13 * exact);
  }
}

TEST_CASE("Duffy rule integrates smooth integrands and oscillatory kernels") {
  const Vec3 a(0, 0, 0), b(2, 0, 0), c(0, 1, 1);
  const Vec3 x = (a + b + c) / 3.0;
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const Complex one = duffy_singular(x, a, b, c, [](const Vec3&) { return Complex(1.0); }, 12);
  CHECK(std::abs(one - area) < 1e-10 * area);
  // e^{-sr}/r: compare against a refined rule
  const Complex s(1.0, 3.0);
  auto f = [&](const Vec3& y) {
    const double r = (y - x).norm();
    return std::exp(-s * r) / r;
  };
  const Complex coarse = duffy_singular(x, a, b, c, f, 10);
  const Complex fine = duffy_singular(x, a, b, c, f, 40);
  CHECK(std::abs(coarse - fine) < 1e-8 * std::abs(fine));
}

TEST_CASE("Duffy rule rejects points off the triangle") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  auto f = [](const Vec3&) { return Complex(1.0); };
  CHECK_THROWS_AS(duffy_singular(Vec3(0.2, 0.2, 0.1), a, b, c, f, 4), DomainError);
  CHECK_THROWS_AS(duffy_singular(Vec3(0.8, 0.8, 0.0), a, b, c, f, 4), DomainError);
}
