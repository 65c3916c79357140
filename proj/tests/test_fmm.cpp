#include <doctest.h>

#include <cmath>

#include "tdbem/bbfmm.hpp"
#include "tdbem/history.hpp"
#include "tdbem/problem.hpp"

using namespace tdbem;

TEST_CASE("Chebyshev weights reproduce polynomials below the order") {
  const ChebBasis b(5);
  auto q = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x + x * x * x * x; };
  auto dq = [](double x) { return -2.0 + 1.5 * x * x + 4.0 * x * x * x; };
  std::vector<double> w(5), dw(5);
  for (double x : {-1.0, -0.3, 0.0, 0.45, 1.0}) {
    b.weights(x, w.data(), dw.data());
    double v = 0.0, dv = 0.0;
    for (int m = 0; m < 5; ++m) {
      v += w[static_cast<size_t>(m)] * q(b.nodes[static_cast<size_t>(m)]);
      dv += dw[static_cast<size_t>(m)] * q(b.nodes[static_cast<size_t>(m)]);
    }
    CHECK(v == doctest::Approx(q(x)).epsilon(1e-12));
    CHECK(dv == doctest::Approx(dq(x)).epsilon(1e-11));
  }
  b.weights(b.nodes[2], w.data());
  CHECK(w[2] == doctest::Approx(1.0));
  CHECK(std::abs(w[0]) < 1e-14);
}

TEST_CASE("single level is pure near field and exact") {
  const auto mesh = unit_cube(1);
  const auto prob = make_problem(mesh, ProblemKind::mixed);
  const auto contour = build_contour(uniform_steps(3.0, 10), radau_iia_2());
  const LayerOperator V(mesh, LayerKind::single, Space::P0, prob.rows);
  const LayerOperator K(mesh, LayerKind::double_layer, Space::P1, prob.rows);
  auto geo = std::make_shared<FmmGeometry>(mesh, prob.rows.x, 1, 2);
  CHECK(geo->interactions(1).empty());
  auto m2l = build_m2l_tensor(*geo, contour, 1.0, 1e-4, -1);
  FmmOptions fo;
  fo.levels = 1;
  fo.order = 2;
  const FmmFamily fv(V, contour, geo, m2l, fo), fk(K, contour, geo, m2l, fo, false);
  const Complex s(1.0, 2.0);
  for (const auto& pair : {std::pair(&fv, &V), std::pair(&fk, &K)}) {
    const Eigen::MatrixXcd D = pair.second->dense(s);
    const auto M = pair.first->at(s);
    Eigen::VectorXcd x = Eigen::VectorXcd::LinSpaced(D.cols(), 0.5, -1.5);
    CHECK((M->apply(x) - D * x).norm() < 1e-12 * (D * x).norm());
  }
}

TEST_CASE("far field converges with the interpolation order") {
  const auto mesh = unit_cube(2);
  const auto prob = make_problem(mesh, ProblemKind::dirichlet);
  const auto contour = build_contour(uniform_steps(3.0, 20), radau_iia_2());
  const LayerOperator V(mesh, LayerKind::single, Space::P0, prob.rows);
  const Complex s(1.0, 2.0);
  const Eigen::MatrixXcd D = V.dense(s);
  const Eigen::VectorXcd x = Eigen::VectorXcd::LinSpaced(D.cols(), 1.0, 2.0);
  const Eigen::VectorXcd ref = D * x;
  std::vector<double> err;
  for (int p : {2, 4}) {
    auto geo = std::make_shared<FmmGeometry>(mesh, prob.rows.x, 2, p);
    CHECK(!geo->interactions(2).empty());
    auto m2l = std::make_shared<M2LTensor>();
    FmmOptions fo;
    fo.order = p;
    const FmmFamily f(V, contour, geo, m2l, fo);
    err.push_back((f.at(s)->apply(x) - ref).norm() / ref.norm());
  }
  CHECK(err[1] < err[0]);
  CHECK(err[1] < 1e-3);
}

TEST_CASE("M2L tensor and separated convolution match the slice sum") {
  const auto mesh = unit_cube(2);
  const auto prob = make_problem(mesh, ProblemKind::dirichlet);
  const auto contour = build_contour(uniform_steps(3.0, 20), radau_iia_2());
  const LayerOperator K(mesh, LayerKind::double_layer, Space::P1, prob.rows);
  auto geo = std::make_shared<FmmGeometry>(mesh, prob.rows.x, 2, 3);
  auto m2l = build_m2l_tensor(*geo, contour, 1.0, 1e-6, -1);
  FmmOptions fo;
  fo.order = 3;
  fo.eps = 1e-6;
  const FmmFamily f(K, contour, geo, m2l, fo);
  const Index R = contour.representatives();
  ConvolutionWeights w;
  w.V = Eigen::MatrixXcd::Zero(K.cols(), R);
  w.E = Eigen::MatrixXcd::Ones(R, 1);
  for (Index j = 0; j < K.cols(); ++j) {
    for (Index l = 0; l < R; ++l) w.V(j, l) = Complex(std::sin(0.3 * j + l), std::cos(0.7 * j)) / (1.0 + l);
  }
  Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(K.rows());
  for (Index l = 0; l < R; ++l) ref += f.at(contour.nodes[static_cast<size_t>(l)])->apply(w.V.col(l));
  const Eigen::VectorXd got = f.convolve(w).col(0);
  CHECK((got - 2.0 * ref.real()).norm() < 1e-4 * (2.0 * ref.real()).norm());
  const auto st = f.stats();
  CHECK(st.shared_bytes == 0.0);
  CHECK(st.compressed_bytes > 0.0);
}
