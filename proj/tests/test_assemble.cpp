#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "tdbem/layer_operator.hpp"

using namespace tdbem;

namespace {

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

double apex_integral(const Vec3& p, const Vec3& q1, const Vec3& q2) {
  const Vec3 e = (q2 - q1).normalized();
  const Vec3 foot = q1 + e * e.dot(p - q1);
  const double d = (p - foot).norm();
  return d * (std::asinh(e.dot(q2 - foot) / d) - std::asinh(e.dot(q1 - foot) / d));
}

}  // namespace

TEST_CASE("static single-layer self entry against the closed form") {
  const auto mesh = unit_cube(1);
  const LayerOperator V(mesh, LayerKind::single, Space::P0, centroid_rows(mesh, iota(mesh.num_triangles())));
  for (Index t : {Index{0}, Index{17}, Index{95}}) {
    const auto& tri = mesh.triangle(t);
    const Vec3 x = mesh.centroid(t);
    double exact = 0.0;
    for (int k = 0; k < 3; ++k) {
      exact += apex_integral(x, mesh.vertex(tri[static_cast<size_t>(k)]), mesh.vertex(tri[static_cast<size_t>((k + 1) % 3)]));
    }
    exact /= 4 * std::numbers::pi;
    const Index i = t;
    const Complex got = V.block(std::span<const Index>(&i, 1), std::span<const Index>(&t, 1), 0.0)(0, 0);
    CHECK(std::abs(got - exact) < 1e-12 * exact);
  }
}

TEST_CASE("free term on the cube: faces, edges, corners") {
  const auto mesh = unit_cube(2);
  const RowSet rows = concat(centroid_rows(mesh, iota(mesh.num_triangles())), vertex_rows(mesh, iota(mesh.num_vertices())));
  const Eigen::VectorXd C = free_term(mesh, rows);
  for (Index i = 0; i < rows.size(); ++i) {
    const Vec3& x = rows.x[static_cast<size_t>(i)];
    int on = 0;  // number of cube faces containing x
    for (int d = 0; d < 3; ++d) on += std::abs(std::abs(x(d)) - 0.5) < 1e-12 ? 1 : 0;
    const double expect = on == 1 ? 0.5 : (on == 2 ? 0.25 : 0.125);
    CHECK(std::abs(C(i) - expect) < 1e-6);
  }
}

TEST_CASE("Gauss flux of the static double layer at free points") {
  const auto mesh = unit_cube(2);
  const RowSet rows = free_rows({Vec3(0.0, 0.0, 0.0), Vec3(-0.4, 0.3, -0.2), Vec3(1.1, -0.3, -0.2), Vec3(0.0, -0.9, 1.5)});
  const LayerOperator K(mesh, LayerKind::double_layer, Space::P1, rows);
  const Eigen::MatrixXcd K0 = K.dense(0.0);
  // limited by the distance-adaptive regular rules
  CHECK(std::abs(K0.row(0).sum() + 1.0) < 1e-5);
  CHECK(std::abs(K0.row(1).sum() + 1.0) < 1e-5);
  CHECK(std::abs(K0.row(2).sum()) < 1e-5);
  CHECK(std::abs(K0.row(3).sum()) < 1e-5);
}

TEST_CASE("representation formula reproduces a Laplace-domain field inside the cube") {
  // u = e^{-s|y-z|}/(4 pi |y-z|) with the source z outside; interior x: u(x) = V q - K u
  const Complex s(0.8, 1.5);
  const Vec3 z(1.1, -0.1, -0.2);
  auto u = [&](const Vec3& y) {
    const double r = (y - z).norm();
    return std::exp(-s * r) / (4 * std::numbers::pi * r);
  };
  auto q = [&](const Vec3& y, const Vec3& n) {
    const Vec3 d = y - z;
    const double r = d.norm();
    return -std::exp(-s * r) * (1.0 + s * r) / (4 * std::numbers::pi * r * r * r) * d.dot(n);
  };
  const std::vector<Vec3> probes{Vec3(0.0, 0.0, 0.0), Vec3(-0.2, 0.1, 0.2)};
  double err_prev = 0.0;
  for (int level = 1; level <= 3; ++level) {
    const auto mesh = unit_cube(level);
    const LayerOperator V(mesh, LayerKind::single, Space::P0, free_rows(probes));
    const LayerOperator K(mesh, LayerKind::double_layer, Space::P1, free_rows(probes));
    Eigen::VectorXcd qh(mesh.num_triangles());
    Eigen::VectorXcd uh(mesh.num_vertices());
    for (Index t = 0; t < mesh.num_triangles(); ++t) qh(t) = q(mesh.centroid(t), mesh.normal(t));
    for (Index v = 0; v < mesh.num_vertices(); ++v) uh(v) = u(mesh.vertex(v));
    const Eigen::VectorXcd rep = V.dense(s) * qh - K.dense(s) * uh;
    double err = 0.0;
    for (size_t p = 0; p < probes.size(); ++p) {
      err = std::max(err, std::abs(rep(static_cast<Index>(p)) - u(probes[p])) / std::abs(u(probes[p])));
    }
    if (level > 1) CHECK(err < 0.5 * err_prev);
    err_prev = err;
  }
  CHECK(err_prev < 2e-3);
}

TEST_CASE("blocks, rows, columns, fibers and entry terms agree with the dense matrix") {
  const auto mesh = unit_cube(1);
  const RowSet rows = vertex_rows(mesh, iota(mesh.num_vertices()));
  const std::vector<Complex> freqs{{0.0, 0.0}, {1.0, 2.0}, {5.0, -3.0}};
  for (auto [kind, space] : {std::pair{LayerKind::single, Space::P0}, std::pair{LayerKind::single, Space::P1},
                             std::pair{LayerKind::double_layer, Space::P1}}) {
    const LayerOperator op(mesh, kind, space, rows, 1.3);
    const Eigen::MatrixXcd D = op.dense(freqs[1]);
    const std::vector<Index> I{3, 7, 20, 41};
    const std::vector<Index> J{0, 5, 6, 30};
    const auto bl = op.blocks(I, J, freqs);
    for (size_t a = 0; a < I.size(); ++a) {
      for (size_t b = 0; b < J.size(); ++b) {
        CHECK(std::abs(bl[1](static_cast<Index>(a), static_cast<Index>(b)) - D(I[a], J[b])) < 1e-14);
        const auto f = op.fiber(I[a], J[b], freqs);
        for (size_t k = 0; k < freqs.size(); ++k) {
          CHECK(std::abs(f(static_cast<Index>(k)) - bl[k](static_cast<Index>(a), static_cast<Index>(b))) < 1e-13);
        }
      }
    }
    const Eigen::VectorXcd r = op.row(7, J, freqs[1]);
    const Eigen::VectorXcd c = op.col(I, 5, freqs[1]);
    for (size_t b = 0; b < J.size(); ++b) CHECK(std::abs(r(static_cast<Index>(b)) - D(7, J[b])) < 1e-14);
    for (size_t a = 0; a < I.size(); ++a) CHECK(std::abs(c(static_cast<Index>(a)) - D(I[a], 5)) < 1e-14);
    // real frequencies give real matrices, conjugate frequencies conjugate matrices
    CHECK(op.dense(2.0).imag().norm() < 1e-14);
    CHECK((op.dense(std::conj(freqs[2])) - op.dense(freqs[2]).conjugate()).norm() < 1e-12);
  }
}

TEST_CASE("retarded kernel decays with Re s") {
  const auto mesh = unit_cube(1);
  const LayerOperator V(mesh, LayerKind::single, Space::P0, centroid_rows(mesh, iota(mesh.num_triangles())));
  const Eigen::MatrixXcd V1 = V.dense(1.0);
  const Eigen::MatrixXcd V5 = V.dense(5.0);
  for (Index i = 0; i < V1.rows(); ++i) {
    for (Index j = 0; j < V1.cols(); ++j) CHECK(V5(i, j).real() <= V1(i, j).real());
  }
}

TEST_CASE("double layer on P0 and free term on open surfaces are rejected") {
  const auto mesh = unit_cube(1);
  CHECK_THROWS_AS(LayerOperator(mesh, LayerKind::double_layer, Space::P0, free_rows({Vec3(2, 2, 2)})), DomainError);
  const auto open = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK_THROWS_AS(free_term(open, free_rows({Vec3(2, 2, 2)})), DomainError);
}
