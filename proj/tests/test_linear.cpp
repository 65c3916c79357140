#include <doctest.h>

#include <random>

#include <Eigen/LU>

#include "tdbem/linear.hpp"

using namespace tdbem;

TEST_CASE("bicgstab on the identity converges in one iteration") {
  const Eigen::VectorXcd b = Eigen::VectorXcd::LinSpaced(8, 1.0, 8.0);
  SolveInfo info;
  const auto x = bicgstab([](const Eigen::VectorXcd& v) { return v; }, b, Eigen::VectorXcd::Zero(8), 1e-12, 10, &info);
  CHECK((x - b).norm() < 1e-12);
  CHECK(info.iterations <= 1);
}

TEST_CASE("zero right-hand side gives zero") {
  const auto x = bicgstab([](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(2.0 * v); }, Eigen::VectorXcd::Zero(5),
                          Eigen::VectorXcd::Zero(5), 1e-10, 10);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("diagonally dominant complex system matches LU") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  const Index n = 50;
  Eigen::MatrixXcd A(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) = Complex(g(rng), g(rng)) * 0.1;
    A(i, i) += Complex(5.0, 1.0);
  }
  Eigen::VectorXcd b(n);
  for (Index i = 0; i < n; ++i) b(i) = Complex(g(rng), g(rng));
  const Eigen::VectorXcd ref = A.partialPivLu().solve(b);
  const DenseMap M(A);
  const auto x = bicgstab([&](const Eigen::VectorXcd& v) { return M.apply(v); }, b, Eigen::VectorXcd::Zero(n), 1e-12, 200);
  CHECK((x - ref).norm() / ref.norm() < 1e-10);
}

TEST_CASE("exhausted iteration budget throws") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(30, 30);
  for (Index i = 0; i < 30; ++i) A(i, i) = std::pow(10.0, i / 5.0);
  const Eigen::VectorXcd b = Eigen::VectorXcd::Ones(30);
  CHECK_THROWS_AS(bicgstab([&](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(A * v); }, b,
                           Eigen::VectorXcd::Zero(30), 1e-14, 2),
                  ConvergenceError);
}
