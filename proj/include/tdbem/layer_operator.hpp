#pragma once

#include <span>
#include <vector>

#include "tdbem/mesh.hpp"
#include "tdbem/quadrature.hpp"

namespace tdbem {

enum class LayerKind { single, double_layer };

// Collocation points with their position relative to the mesh.
struct RowSet {
  std::vector<Vec3> x;
  std::vector<Index> triangle;  // x is the centroid of this triangle, else -1
  std::vector<Index> vertex;    // x is this mesh vertex, else -1

  Index size() const { return static_cast<Index>(x.size()); }
};

RowSet centroid_rows(const TriangleMesh& mesh, const std::vector<Index>& triangles);
RowSet vertex_rows(const TriangleMesh& mesh, const std::vector<Index>& vertices);
RowSet free_rows(const std::vector<Vec3>& points);
RowSet concat(const RowSet& a, const RowSet& b);

struct QuadratureOptions {
  int base_order = 6;        // order for the nearest regular pairs
  int singular_points = 10;  // Gauss points per direction of the Duffy rule
  int near_points = 8;
  double near_factor = 1.5;  // near-singular if |x - centroid| < near_factor * diameter
};

// One quadrature contribution e^{-s tau} (1 + kappa s tau) * a to an entry.
struct ExpTerm {
  double tau;
  double a;
};

// Collocation matrices of the retarded single layer (kernel e^{-sr/c}/(4 pi r),
// P0 or P1 columns) or double layer (normal derivative in y, P1 columns) on a mesh.
class LayerOperator {
 public:
  LayerOperator(const TriangleMesh& mesh, LayerKind kind, Space space, RowSet rows, double wave_speed = 1.0,
                QuadratureOptions opts = {});

  Index rows() const { return rows_.size(); }
  Index cols() const { return space_ == Space::P0 ? mesh_->num_triangles() : mesh_->num_vertices(); }
  LayerKind kind() const { return kind_; }
  Space space() const { return space_; }
  const TriangleMesh& mesh() const { return *mesh_; }
  const RowSet& row_set() const { return rows_; }
  double wave_speed() const { return c_; }
  // kappa in the entry representation: 0 single layer, 1 double layer
  double kappa() const { return kind_ == LayerKind::single ? 0.0 : 1.0; }

  Eigen::MatrixXcd block(std::span<const Index> I, std::span<const Index> J, Complex s) const;
  // one block per frequency, sharing the geometry work
  std::vector<Eigen::MatrixXcd> blocks(std::span<const Index> I, std::span<const Index> J,
                                       std::span<const Complex> s) const;
  Eigen::MatrixXcd dense(Complex s) const;
  Eigen::VectorXcd row(Index i, std::span<const Index> J, Complex s) const;
  Eigen::VectorXcd col(std::span<const Index> I, Index j, Complex s) const;
  // entry (i,j) at every frequency
  Eigen::VectorXcd fiber(Index i, Index j, std::span<const Complex> s) const;
  // quadrature terms of entry (i,j), merged over the support of column j
  std::vector<ExpTerm> entry_terms(Index i, Index j) const;

  // Visit every quadrature point of row i on triangle t: f(tau, a, phi[3]).
  template <typename F>
  void for_each_point(Index i, Index t, F&& f) const;

 private:
  struct CachedRule {
    std::vector<Vec3> y;
    std::vector<double> w;
    std::vector<std::array<double, 3>> phi;
  };
  const CachedRule& cached_rule(Index t, int order) const;
  std::vector<Index> column_support(Index j) const;

  const TriangleMesh* mesh_;
  LayerKind kind_;
  Space space_;
  RowSet rows_;
  double c_;
  QuadratureOptions opts_;
  std::vector<std::vector<CachedRule>> rules_;  // [triangle][order]
};

// C(x) = -sum_j K_0[i, j] over all P1 columns; 1/2 on smooth parts of a closed surface
Eigen::VectorXd free_term(const TriangleMesh& mesh, const RowSet& rows, QuadratureOptions opts = {});

// e^{-s tau} (1 + kappa s tau)
inline Complex exp_kernel(Complex s, double tau, double kappa) {
  const double re = std::exp(-s.real() * tau);
  const double ph = -s.imag() * tau;
  const Complex e(re * std::cos(ph), re * std::sin(ph));
  return kappa == 0.0 ? e : e * (1.0 + kappa * s * tau);
}

template <typename F>
void LayerOperator::for_each_point(Index i, Index t, F&& f) const {
  const Vec3& x = rows_.x[static_cast<size_t>(i)];
  const auto& tri = mesh_->triangle(t);
  const Vec3& a = mesh_->vertex(tri[0]);
  const Vec3& b = mesh_->vertex(tri[1]);
  const Vec3& c = mesh_->vertex(tri[2]);
  const Vec3& n = mesh_->normal(t);
  const double diam = mesh_->diameter(t);
  const bool dlp = kind_ == LayerKind::double_layer;
  // the double-layer kernel vanishes identically on triangles coplanar with x
  if (dlp && std::abs(n.dot(x - a)) <= 1e-12 * diam) return;
  constexpr double inv4pi = 0.07957747154594767;
  auto emit = [&](const Vec3& y, double w, const std::array<double, 3>& phi) {
    const Vec3 d = x - y;
    const double r = d.norm();
    const double k = dlp ? d.dot(n) / (r * r * r) : 1.0 / r;
    f(r / c_, w * k * inv4pi, phi);
  };
  const auto ri = static_cast<size_t>(i);
  const bool singular = rows_.triangle[ri] == t ||
                        (rows_.vertex[ri] >= 0 && (tri[0] == rows_.vertex[ri] || tri[1] == rows_.vertex[ri] ||
                                                   tri[2] == rows_.vertex[ri]));
  const double dist = (x - mesh_->centroid(t)).norm();
  if (singular || dist < opts_.near_factor * diam) {
    const auto pts = singular ? singular_points(x, a, b, c, opts_.singular_points)
                              : near_singular_points(x, a, b, c, opts_.near_points);
    for (const auto& p : pts) {
      const Vec3 y = a + p.xi * (b - a) + p.eta * (c - a);
      emit(y, p.w, {1.0 - p.xi - p.eta, p.xi, p.eta});
    }
    return;
  }
  const CachedRule& rule = cached_rule(t, select_order(dist, diam, opts_.base_order));
  for (size_t q = 0; q < rule.y.size(); ++q) emit(rule.y[q], rule.w[q], rule.phi[q]);
}

}  // namespace tdbem
