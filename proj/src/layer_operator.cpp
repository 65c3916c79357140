#include "tdbem/layer_operator.hpp"

#include <algorithm>

namespace tdbem {

RowSet centroid_rows(const TriangleMesh& mesh, const std::vector<Index>& triangles) {
  RowSet r;
  for (Index t : triangles) {
    r.x.push_back(mesh.centroid(t));
    r.triangle.push_back(t);
    r.vertex.push_back(-1);
  }
  return r;
}

RowSet vertex_rows(const TriangleMesh& mesh, const std::vector<Index>& vertices) {
  RowSet r;
  for (Index v : vertices) {
    r.x.push_back(mesh.vertex(v));
    r.triangle.push_back(-1);
    r.vertex.push_back(v);
  }
  return r;
}

RowSet free_rows(const std::vector<Vec3>& points) {
  RowSet r;
  r.x = points;
  r.triangle.assign(points.size(), -1);
  r.vertex.assign(points.size(), -1);
  return r;
}

RowSet concat(const RowSet& a, const RowSet& b) {
  RowSet r = a;
  r.x.insert(r.x.end(), b.x.begin(), b.x.end());
  r.triangle.insert(r.triangle.end(), b.triangle.begin(), b.triangle.end());
  r.vertex.insert(r.vertex.end(), b.vertex.begin(), b.vertex.end());
  return r;
}

LayerOperator::LayerOperator(const TriangleMesh& mesh, LayerKind kind, Space space, RowSet rows, double wave_speed,
                             QuadratureOptions opts)
    : mesh_(&mesh), kind_(kind), space_(space), rows_(std::move(rows)), c_(wave_speed), opts_(opts) {
  if (!(wave_speed > 0.0)) throw DomainError("wave speed must be positive");
  if (kind == LayerKind::double_layer && space == Space::P0) {
    throw DomainError("double layer operator acts on P1 traces");
  }
  if (opts.base_order < 2 || opts.base_order > 20) throw DomainError("quadrature base order out of range");
  rules_.resize(static_cast<size_t>(mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Vec3& a = mesh.vertex(tri[0]);
    const Vec3& b = mesh.vertex(tri[1]);
    const Vec3& c = mesh.vertex(tri[2]);
    auto& per_order = rules_[static_cast<size_t>(t)];
    per_order.resize(static_cast<size_t>(opts.base_order + 1));
    for (int order = 2; order <= opts.base_order; ++order) {
      CachedRule& cr = per_order[static_cast<size_t>(order)];
      for (const auto& p : regular_points(order, mesh.area(t))) {
        cr.y.push_back(a + p.xi * (b - a) + p.eta * (c - a));
        cr.w.push_back(p.w);
        cr.phi.push_back({1.0 - p.xi - p.eta, p.xi, p.eta});
      }
    }
  }
}

const LayerOperator::CachedRule& LayerOperator::cached_rule(Index t, int order) const {
  return rules_[static_cast<size_t>(t)][static_cast<size_t>(order)];
}

std::vector<Index> LayerOperator::column_support(Index j) const {
  if (space_ == Space::P0) return {j};
  return mesh_->vertex_triangles(j);
}

namespace {

struct PointBuffer {
  std::vector<double> tau;
  std::vector<double> a;
  std::vector<std::array<double, 3>> phi;
  void clear() {
    tau.clear();
    a.clear();
    phi.clear();
  }
};

}  // namespace

std::vector<Eigen::MatrixXcd> LayerOperator::blocks(std::span<const Index> I, std::span<const Index> J,
                                                    std::span<const Complex> s) const {
  const auto ni = static_cast<Index>(I.size());
  const auto nj = static_cast<Index>(J.size());
  std::vector<Eigen::MatrixXcd> out(s.size(), Eigen::MatrixXcd::Zero(ni, nj));
  const double kappa = this->kappa();
  PointBuffer buf;
  if (space_ == Space::P0) {
    for (Index ii = 0; ii < ni; ++ii) {
      for (Index jj = 0; jj < nj; ++jj) {
        buf.clear();
        for_each_point(I[static_cast<size_t>(ii)], J[static_cast<size_t>(jj)],
                       [&](double tau, double a, const std::array<double, 3>&) {
                         buf.tau.push_back(tau);
                         buf.a.push_back(a);
                       });
        for (size_t k = 0; k < s.size(); ++k) {
          Complex acc = 0.0;
          for (size_t q = 0; q < buf.tau.size(); ++q) acc += buf.a[q] * exp_kernel(s[k], buf.tau[q], kappa);
          out[k](ii, jj) = acc;
        }
      }
    }
    return out;
  }
  // P1: visit each triangle touching a column vertex once per row
  std::vector<Index> local(static_cast<size_t>(mesh_->num_vertices()), -1);
  std::vector<Index> support;
  std::vector<char> seen(static_cast<size_t>(mesh_->num_triangles()), 0);
  for (Index jj = 0; jj < nj; ++jj) {
    const Index v = J[static_cast<size_t>(jj)];
    local[static_cast<size_t>(v)] = jj;
    for (Index t : mesh_->vertex_triangles(v)) {
      if (!seen[static_cast<size_t>(t)]) {
        seen[static_cast<size_t>(t)] = 1;
        support.push_back(t);
      }
    }
  }
  std::vector<Complex> e;
  for (Index ii = 0; ii < ni; ++ii) {
    const Index i = I[static_cast<size_t>(ii)];
    for (Index t : support) {
      buf.clear();
      for_each_point(i, t, [&](double tau, double a, const std::array<double, 3>& phi) {
        buf.tau.push_back(tau);
        buf.a.push_back(a);
        buf.phi.push_back(phi);
      });
      if (buf.tau.empty()) continue;
      const auto& tri = mesh_->triangle(t);
      std::array<Index, 3> cols{};
      for (int k = 0; k < 3; ++k) cols[static_cast<size_t>(k)] = local[static_cast<size_t>(tri[static_cast<size_t>(k)])];
      for (size_t k = 0; k < s.size(); ++k) {
        std::array<Complex, 3> acc{};
        for (size_t q = 0; q < buf.tau.size(); ++q) {
          const Complex v = buf.a[q] * exp_kernel(s[k], buf.tau[q], kappa);
          acc[0] += v * buf.phi[q][0];
          acc[1] += v * buf.phi[q][1];
          acc[2] += v * buf.phi[q][2];
        }
        for (int c = 0; c < 3; ++c) {
          if (cols[static_cast<size_t>(c)] >= 0) out[k](ii, cols[static_cast<size_t>(c)]) += acc[static_cast<size_t>(c)];
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXcd LayerOperator::block(std::span<const Index> I, std::span<const Index> J, Complex s) const {
  return std::move(blocks(I, J, std::span<const Complex>(&s, 1))[0]);
}

Eigen::MatrixXcd LayerOperator::dense(Complex s) const {
  std::vector<Index> I(static_cast<size_t>(rows()));
  std::vector<Index> J(static_cast<size_t>(cols()));
  for (size_t i = 0; i < I.size(); ++i) I[i] = static_cast<Index>(i);
  for (size_t j = 0; j < J.size(); ++j) J[j] = static_cast<Index>(j);
  return block(I, J, s);
}

Eigen::VectorXcd LayerOperator::row(Index i, std::span<const Index> J, Complex s) const {
  return block(std::span<const Index>(&i, 1), J, s).row(0).transpose();
}

Eigen::VectorXcd LayerOperator::col(std::span<const Index> I, Index j, Complex s) const {
  return block(I, std::span<const Index>(&j, 1), s).col(0);
}

std::vector<ExpTerm> LayerOperator::entry_terms(Index i, Index j) const {
  std::vector<ExpTerm> terms;
  for (Index t : column_support(j)) {
    int local = 0;
    if (space_ == Space::P1) {
      const auto& tri = mesh_->triangle(t);
      local = tri[0] == j ? 0 : (tri[1] == j ? 1 : 2);
    }
    for_each_point(i, t, [&](double tau, double a, const std::array<double, 3>& phi) {
      terms.push_back({tau, space_ == Space::P1 ? a * phi[static_cast<size_t>(local)] : a});
    });
  }
  return terms;
}

Eigen::VectorXcd LayerOperator::fiber(Index i, Index j, std::span<const Complex> s) const {
  const auto terms = entry_terms(i, j);
  const double kappa = this->kappa();
  Eigen::VectorXcd f(static_cast<Index>(s.size()));
  for (size_t k = 0; k < s.size(); ++k) {
    Complex acc = 0.0;
    for (const auto& term : terms) acc += term.a * exp_kernel(s[k], term.tau, kappa);
    f(static_cast<Index>(k)) = acc;
  }
  return f;
}

Eigen::VectorXd free_term(const TriangleMesh& mesh, const RowSet& rows, QuadratureOptions opts) {
  if (!mesh.closed()) throw DomainError("free term requires a closed surface");
  const LayerOperator K(mesh, LayerKind::double_layer, Space::P1, rows, 1.0, opts);
  Eigen::VectorXd C(rows.size());
  for (Index i = 0; i < rows.size(); ++i) {
    double acc = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      K.for_each_point(i, t, [&](double, double a, const std::array<double, 3>&) { acc += a; });
    }
    C(i) = -acc;
  }
  return C;
}

}  // namespace tdbem
