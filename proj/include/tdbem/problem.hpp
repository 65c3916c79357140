#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "tdbem/layer_operator.hpp"
#include "tdbem/mesh.hpp"

namespace tdbem {

// u(y,t) = (t - r/c)^2 / r * e^{-c (t - r/c)} H(t - r/c), r = |y - x_star|
struct SmoothPulse {
  Vec3 source{0.8, 0.2, 0.3};
  double c = 1.0;

  double value(const Vec3& y, double t) const;
  // grad_y u . n
  double flux(const Vec3& y, const Vec3& n, double t) const;
};

enum class ProblemKind { dirichlet, mixed };

// Collocation system V q - (C + K) u = 0 with the unknown traces selected by
// the boundary partition.
struct BoundaryProblem {
  const TriangleMesh* mesh = nullptr;
  ProblemKind kind = ProblemKind::dirichlet;
  BoundaryPartition part;
  RowSet rows;                   // centroids of Dirichlet triangles, then Neumann vertices
  std::vector<Index> q_unknown;  // triangles with unknown flux
  std::vector<Index> u_unknown;  // vertices with unknown pressure
  Eigen::SparseMatrix<double> C;  // rows x vertices, free term times P1 evaluation

  Index unknowns() const { return static_cast<Index>(q_unknown.size() + u_unknown.size()); }
};

// faces of the cube whose outward normal has a positive component sum
Part default_dirichlet_half(const TriangleMesh& mesh, Index t);

BoundaryProblem make_problem(const TriangleMesh& mesh, ProblemKind kind,
                             const std::function<Part(Index)>& triangle_part = {}, QuadratureOptions opts = {});

// Given data at time t: Dirichlet pressure at vertices, flux as triangle mean.
struct BoundaryData {
  std::function<double(Index vertex, double t)> pressure;
  std::function<double(Index triangle, double t)> flux;
};

BoundaryData pulse_data(const TriangleMesh& mesh, const SmoothPulse& pulse);

// Values of every dof at the midpoint of step n, interpolated in time through
// t_{n-1} and the stage times.
Eigen::VectorXd midpoint_values(const std::vector<Eigen::MatrixXd>& hist, size_t n, const Eigen::VectorXd& stage_c);

struct TraceError {
  double flux = 0.0;      // L2 over the triangles with unknown flux
  double pressure = 0.0;  // L2 over the triangles touching unknown pressure
  double total() const;
};

// Per step: L2 errors of the midpoint values, order-6 rule.
std::vector<TraceError> midpoint_errors(const BoundaryProblem& prob, const std::vector<double>& steps,
                                        const Eigen::VectorXd& stage_c, const std::vector<Eigen::MatrixXd>& q,
                                        const std::vector<Eigen::MatrixXd>& u, const SmoothPulse& pulse);
double lmax(const std::vector<TraceError>& errors);
// log2(e_coarse / e_fine)
double eoc(double e_coarse, double e_fine);

}  // namespace tdbem
