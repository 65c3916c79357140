#include <doctest.h>

#include <random>

#include "tdbem/contour.hpp"
#include "tdbem/family.hpp"
#include "tdbem/history.hpp"
#include "tdbem/problem.hpp"
#include "tdbem/tensor3.hpp"

using namespace tdbem;

namespace {

Eigen::MatrixXcd random_matrix(Index m, Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd A(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) = Complex(g(rng), g(rng));
  }
  return A;
}

// sum_d A_d g_d(k)
FaceOracle synthetic(const std::vector<Eigen::MatrixXcd>& A, const std::vector<Eigen::VectorXcd>& g) {
  FaceOracle o;
  o.frequencies = g[0].size();
  o.face = [A, g](Index k) {
    BlockMatrix f;
    f.D = Eigen::MatrixXcd::Zero(A[0].rows(), A[0].cols());
    for (size_t d = 0; d < A.size(); ++d) f.D += g[d](k) * A[d];
    return f;
  };
  o.fiber = [A, g](Index i, Index j) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(g[0].size());
    for (size_t d = 0; d < A.size(); ++d) f += A[d](i, j) * g[d];
    return f;
  };
  return o;
}

double tensor_norm(const std::vector<FrequencyCross>& crosses) {
  double s = 0.0;
  for (Index k = 0; k < crosses[0].fiber.size(); ++k) {
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(crosses[0].face.rows(), crosses[0].face.cols());
    for (const auto& c : crosses) S += c.fiber(k) * c.face.dense();
    s += S.squaredNorm();
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("separable tensor has rank one") {
  std::mt19937 rng(11);
  const auto A = random_matrix(7, 5, rng);
  const auto g = random_matrix(12, 1, rng).col(0).eval();
  const auto ca = three_d_aca(synthetic({A}, {g}), 1e-10, 0.0);
  REQUIRE(ca.rank() == 1);
  CHECK(ca.crosses[0].k == 0);
  for (Index k = 0; k < 12; ++k) CHECK((ca.slice(k) - g(k) * A).norm() < 1e-12 * A.norm() * std::abs(g(k)) + 1e-14);
}

TEST_CASE("sum of two separable terms has rank two with distinct frequencies") {
  std::mt19937 rng(12);
  const std::vector<Eigen::MatrixXcd> A{random_matrix(6, 6, rng), random_matrix(6, 6, rng)};
  const std::vector<Eigen::VectorXcd> g{random_matrix(9, 1, rng).col(0), random_matrix(9, 1, rng).col(0)};
  const auto ca = three_d_aca(synthetic(A, g), 1e-10, 0.0);
  REQUIRE(ca.rank() == 2);
  CHECK(ca.crosses[0].k != ca.crosses[1].k);
  for (Index k = 0; k < 9; ++k) {
    const Eigen::MatrixXcd ref = g[0](k) * A[0] + g[1](k) * A[1];
    CHECK((ca.slice(k) - ref).norm() < 1e-10 * ref.norm());
  }
}

TEST_CASE("rank cap is honoured and reported") {
  std::mt19937 rng(13);
  std::vector<Eigen::MatrixXcd> A;
  std::vector<Eigen::VectorXcd> g;
  for (int d = 0; d < 4; ++d) {
    A.push_back(random_matrix(5, 5, rng));
    g.push_back(random_matrix(8, 1, rng).col(0));
  }
  const auto ca = three_d_aca(synthetic(A, g), 1e-12, 0.0, 2);
  CHECK(ca.rank() == 2);
  CHECK(ca.capped);
}

TEST_CASE("Frobenius recursion equals the brute-force norm") {
  std::mt19937 rng(14);
  std::vector<FrequencyCross> crosses(4);
  for (size_t d = 0; d < crosses.size(); ++d) {
    crosses[d].face.D = random_matrix(6, 4, rng);
    crosses[d].fiber = random_matrix(10, 1, rng).col(0);
  }
  crosses[2].face.D.resize(0, 0);
  crosses[2].face.low_rank = true;
  crosses[2].face.L.U = random_matrix(6, 2, rng);
  crosses[2].face.L.V = random_matrix(4, 2, rng);
  CHECK(recursive_frobenius(crosses) == doctest::Approx(tensor_norm(crosses)).epsilon(1e-12));
}

TEST_CASE("separated convolution equals the slice sum") {
  std::mt19937 rng(15);
  std::vector<FrequencyCross> crosses(3);
  for (auto& c : crosses) {
    c.face.D = random_matrix(5, 7, rng);
    c.fiber = random_matrix(6, 1, rng).col(0);
  }
  const CrossApproximation ca{crosses, false};
  const auto W = random_matrix(7, 6, rng);
  Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(5);
  for (Index k = 0; k < 6; ++k) ref += ca.slice(k) * W.col(k);
  CHECK((separated_convolution(crosses, W) - ref).norm() < 1e-12 * ref.norm());

  const auto V = random_matrix(7, 6, rng);
  const auto E = random_matrix(6, 2, rng);
  Eigen::MatrixXcd ref2 = Eigen::MatrixXcd::Zero(5, 2);
  for (Index k = 0; k < 6; ++k) ref2 += ca.slice(k) * V.col(k) * E.row(k);
  CHECK((separated_convolution(crosses, V, E) - ref2).norm() < 1e-12 * ref2.norm());
}

TEST_CASE("operator tensor reproduces assembled slices on the coarse cube") {
  const auto mesh = unit_cube(1);
  const auto steps = uniform_steps(3.0, 10);
  const auto contour = build_contour(steps, radau_iia_2());
  const auto prob = make_problem(mesh, ProblemKind::dirichlet);
  const LayerOperator op(mesh, LayerKind::single, Space::P0, prob.rows);
  CompressionOptions opts;
  opts.eps_aca = 1e-6;
  opts.eps = 1e-4;
  const AcaFamily fam(op, contour, opts);
  const DenseFamily dense(op, contour);
  for (Index k : {Index{0}, Index{5}, contour.representatives() - 1}) {
    const Eigen::MatrixXcd D = op.dense(contour.nodes[static_cast<size_t>(k)]);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(D.rows(), D.cols());
    for (Index b = 0; b < static_cast<Index>(fam.block_tree().blocks.size()); ++b) {
      const auto& bn = fam.block_tree().blocks[static_cast<size_t>(b)];
      const auto I = fam.row_tree().indices(bn.row);
      const auto J = fam.col_tree().indices(bn.col);
      const auto S = fam.tensor(b).slice(k);
      for (size_t i = 0; i < I.size(); ++i) {
        for (size_t j = 0; j < J.size(); ++j) A(I[i], J[j]) = S(static_cast<Index>(i), static_cast<Index>(j));
      }
    }
    CHECK((A - D).norm() <= 10 * opts.eps * D.norm());
  }
  const auto st = fam.stats();
  CHECK(st.compressed_bytes < st.dense_bytes);
}
