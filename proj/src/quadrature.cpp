#include "tdbem/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace tdbem {

namespace {

LineRule make_gauss_legendre(int n) {
  LineRule r;
  r.x.resize(static_cast<size_t>(n));
  r.w.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[static_cast<size_t>(i)] = 0.5 * (1.0 - z);
    r.w[static_cast<size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

// fully symmetric orbit helpers
void add_center(TriangleRule& r, double w) {
  r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  r.weights.push_back(w);
}

void add_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  for (const auto& p : {Eigen::Vector2d(a, a), Eigen::Vector2d(b, a), Eigen::Vector2d(a, b)}) {
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

void add_orbit6(TriangleRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  for (const auto& p : {Eigen::Vector2d(a, b), Eigen::Vector2d(b, a), Eigen::Vector2d(a, c), Eigen::Vector2d(c, a),
                        Eigen::Vector2d(b, c), Eigen::Vector2d(c, b)}) {
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

TriangleRule make_triangle_rule(int order) {
  TriangleRule r;
  r.degree = order;
  switch (order) {
    case 1:
      add_center(r, 0.5);
      return r;
    case 2:
      add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
      return r;
    case 3:
    case 4:
      add_orbit3(r, 0.445948490915965, 0.5 * 0.223381589678011);
      add_orbit3(r, 0.091576213509771, 0.5 * 0.109951743655322);
      return r;
    case 5:
      add_center(r, 0.5 * 0.225);
      add_orbit3(r, 0.470142064105115, 0.5 * 0.132394152788506);
      add_orbit3(r, 0.101286507323456, 0.5 * 0.125939180544827);
      return r;
    case 6:
      add_orbit3(r, 0.249286745170910, 0.5 * 0.116786275726379);
      add_orbit3(r, 0.063089014491502, 0.5 * 0.050844906370207);
      add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.5 * 0.082851075618374);
      return r;
    default:
      break;
  }
  // collapsed tensor Gauss rule: x = u, y = (1 - u) v
  const int n = (order + 3) / 2;
  const LineRule& g = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.x[static_cast<size_t>(i)];
      const double v = g.x[static_cast<size_t>(j)];
      r.points.emplace_back(u, (1.0 - u) * v);
      r.weights.push_back(g.w[static_cast<size_t>(i)] * g.w[static_cast<size_t>(j)] * (1.0 - u));
    }
  }
  return r;
}

}  // namespace

const LineRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw DomainError("Gauss-Legendre order out of range");
  static std::mutex mutex;
  static std::map<int, LineRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

const TriangleRule& gauss_triangle(int order) {
  if (order < 1 || order > 20) throw DomainError("triangle quadrature order out of range");
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> v;
    for (int k = 1; k <= 20; ++k) v.push_back(make_triangle_rule(k));
    return v;
  }();
  return rules[static_cast<size_t>(order - 1)];
}

int select_order(double dist, double h, int base) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  const double ratio = std::max(dist, h) / h;
  const int order = base - static_cast<int>(std::floor(std::log2(ratio)));
  return std::clamp(order, 2, base);
}

std::vector<SurfacePoint> regular_points(int order, double area) {
  const TriangleRule& r = gauss_triangle(order);
  std::vector<SurfacePoint> pts(r.points.size());
  for (size_t q = 0; q < pts.size(); ++q) {
    pts[q] = {r.points[q].x(), r.points[q].y(), 2.0 * area * r.weights[q]};
  }
  return pts;
}

namespace {

// reference coordinates of the projection of x onto the plane of (a,b,c)
Eigen::Vector2d reference_coordinates(const Vec3& x, const Vec3& e1, const Vec3& e2, const Vec3& a) {
  Eigen::Matrix2d G;
  G << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
  const Eigen::Vector2d rhs(e1.dot(x - a), e2.dot(x - a));
  return G.ldlt().solve(rhs);
}

std::vector<SurfacePoint> split_points(const Eigen::Vector2d& p, const Vec3& e1, const Vec3& e2, int n);

}  // namespace

std::vector<SurfacePoint> singular_points(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, int n) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 nrm = e1.cross(e2);
  const double twice_area = nrm.norm();
  const double diam = std::max({e1.norm(), e2.norm(), (c - b).norm()});
  const double tol = 1e-10 * diam;
  if (std::abs(nrm.dot(x - a)) / twice_area > tol) throw DomainError("singular point is not in the triangle plane");
  const Eigen::Vector2d p = reference_coordinates(x, e1, e2, a);
  const std::array<double, 3> bary{1.0 - p.x() - p.y(), p.x(), p.y()};
  for (double l : bary) {
    if (l < -1e-10) throw DomainError("singular point outside the triangle");
  }
  return split_points(p, e1, e2, n);
}

std::vector<SurfacePoint> near_singular_points(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, int n) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  Eigen::Vector2d p = reference_coordinates(x, e1, e2, a);
  // closest point of the closed reference triangle in the physical metric
  const Vec3 proj = a + p.x() * e1 + p.y() * e2;
  if (p.x() < 0.0 || p.y() < 0.0 || p.x() + p.y() > 1.0) {
    const std::array<Vec3, 3> v{a, b, c};
    const std::array<Eigen::Vector2d, 3> ref{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d best_p = p;
    for (int k = 0; k < 3; ++k) {
      const Vec3& v0 = v[static_cast<size_t>(k)];
      const Vec3 d = v[static_cast<size_t>((k + 1) % 3)] - v0;
      const double t = std::clamp(d.dot(proj - v0) / d.squaredNorm(), 0.0, 1.0);
      const double dist = (v0 + t * d - proj).norm();
      if (dist < best) {
        best = dist;
        best_p = ref[static_cast<size_t>(k)] + t * (ref[static_cast<size_t>((k + 1) % 3)] - ref[static_cast<size_t>(k)]);
      }
    }
    p = best_p;
  }
  return split_points(p, e1, e2, n);
}

namespace {

std::vector<SurfacePoint> split_points(const Eigen::Vector2d& p, const Vec3& e1, const Vec3& e2, int n) {
  const double twice_area = e1.cross(e2).norm();
  const std::array<Eigen::Vector2d, 3> corner{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> subs;
  for (int k = 0; k < 3; ++k) {
    const auto& q1 = corner[static_cast<size_t>(k)];
    const auto& q2 = corner[static_cast<size_t>((k + 1) % 3)];
    // subtriangle (p, q1, q2) has zero area when p lies on edge q1-q2
    const double det = (q1 - p).x() * (q2 - p).y() - (q1 - p).y() * (q2 - p).x();
    if (std::abs(det) > 1e-12) subs.emplace_back(q1, q2);
  }
  const LineRule& g = gauss_legendre(n);
  std::vector<SurfacePoint> pts;
  pts.reserve(subs.size() * static_cast<size_t>(n * n));
  for (const auto& [q1, q2] : subs) {
    const Eigen::Vector2d d1 = q1 - p;
    const Eigen::Vector2d d2 = q2 - q1;
    const double jac = std::abs(d1.x() * d2.y() - d1.y() * d2.x());
    // |y - x| = u |D1 + v D2|; a sinh substitution in v around the foot of the
    // perpendicular cancels the near-singular angular factor
    const Vec3 D1 = d1.x() * e1 + d1.y() * e2;
    const Vec3 D2 = d2.x() * e1 + d2.y() * e2;
    const double dd = D2.squaredNorm();
    const double v0 = -D1.dot(D2) / dd;
    const double delta = D1.cross(D2).norm() / dd;
    const double w_lo = std::asinh((0.0 - v0) / delta);
    const double w_hi = std::asinh((1.0 - v0) / delta);
    for (int i = 0; i < n; ++i) {
      const double u = g.x[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) {
        const double w = w_lo + (w_hi - w_lo) * g.x[static_cast<size_t>(j)];
        const double v = v0 + delta * std::sinh(w);
        const double dv = delta * std::cosh(w) * (w_hi - w_lo) * g.w[static_cast<size_t>(j)];
        const Eigen::Vector2d r = p + u * d1 + u * v * d2;
        pts.push_back({r.x(), r.y(), g.w[static_cast<size_t>(i)] * dv * u * jac * twice_area});
      }
    }
  }
  return pts;
}

}  // namespace

Complex duffy_singular(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c,
                       const std::function<Complex(const Vec3&)>& f, int n) {
  Complex acc = 0.0;
  for (const auto& sp : singular_points(x, a, b, c, n)) {
    acc += sp.w * f(a + sp.xi * (b - a) + sp.eta * (c - a));
  }
  return acc;
}

}  // namespace tdbem
