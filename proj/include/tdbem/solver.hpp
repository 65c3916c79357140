#pragma once

#include <vector>

#include "tdbem/family.hpp"
#include "tdbem/problem.hpp"
#include "tdbem/rk.hpp"

namespace tdbem {

struct SolverOptions {
  ButcherTableau tableau = radau_iia_2();
  double tol = 1e-8;  // BiCGstab relative residual
  int max_iter = 2000;
  bool direct = true;  // LU when both operators hold dense slices
};

struct SolverTimings {
  double operators = 0.0;    // single-frequency operators and factorizations
  double convolution = 0.0;  // history sums
  double solve = 0.0;
};

// Traces at every stage of every step.
struct Solution {
  std::vector<double> steps;
  std::vector<Eigen::MatrixXd> q;       // triangles x stages
  std::vector<Eigen::MatrixXd> u;       // vertices x stages
  std::vector<Eigen::MatrixXd> probes;  // probe points x stages
  std::vector<SolveInfo> solves;        // one per step and solved eigenvalue
  double max_imag_ratio = 0.0;          // |Im| / |Re| of the recovered stage traces
  SolverTimings timings;
};

// Representation u(x) = V q - K u at free points.
struct ProbeOperators {
  const OperatorFamily* V = nullptr;
  const OperatorFamily* K = nullptr;
};

// gCQ time stepping of V q - (C + K) u = 0 with the given data. V maps
// triangles, K maps vertices, both on the problem's collocation rows.
Solution solve_gcq(const BoundaryProblem& prob, const OperatorFamily& V, const OperatorFamily& K,
                   const Contour& contour, const std::vector<double>& steps, const BoundaryData& data,
                   const SolverOptions& opts = {}, const ProbeOperators& probes = {});

}  // namespace tdbem
