#include <doctest.h>

#include <cmath>

#include "tdbem/solver.hpp"

using namespace tdbem;

TEST_CASE("pulse value and flux") {
  const SmoothPulse p;
  CHECK(p.value(Vec3(0.5, 0.2, 0.3), 1.3) == doctest::Approx(std::exp(-1.0) / 0.3).epsilon(1e-12));
  CHECK(p.value(Vec3(0.5, 0.2, 0.3), 0.29) == 0.0);
  const Vec3 y(-0.1, 0.4, 0.5), n = Vec3(0.3, -1.0, 0.2).normalized();
  const double h = 1e-6, t = 1.7;
  const double fd = (p.value(y + h * n, t) - p.value(y - h * n, t)) / (2 * h);
  CHECK(p.flux(y, n, t) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("problem rows and free terms") {
  const auto mesh = unit_cube(1);
  const auto dir = make_problem(mesh, ProblemKind::dirichlet);
  CHECK(dir.rows.size() == mesh.num_triangles());
  CHECK(dir.u_unknown.empty());
  CHECK(static_cast<Index>(dir.q_unknown.size()) == mesh.num_triangles());
  const auto mix = make_problem(mesh, ProblemKind::mixed);
  CHECK(mix.rows.size() == static_cast<Index>(mix.q_unknown.size() + mix.u_unknown.size()));
  CHECK(!mix.u_unknown.empty());
  CHECK(!mix.q_unknown.empty());
  // centroid rows of flat faces carry C = 1/2
  const Eigen::VectorXd rowsum = dir.C * Eigen::VectorXd::Ones(mesh.num_vertices());
  for (Index i = 0; i < dir.rows.size(); ++i) CHECK(rowsum(i) == doctest::Approx(0.5));
  CHECK(eoc(0.4, 0.2) == doctest::Approx(1.0));
}

TEST_CASE("zero data gives a zero solution") {
  const auto mesh = unit_cube(1);
  const auto prob = make_problem(mesh, ProblemKind::mixed);
  const auto steps = uniform_steps(1.5, 5);
  const auto contour = build_contour(steps, radau_iia_2());
  const LayerOperator Vop(mesh, LayerKind::single, Space::P0, prob.rows);
  const LayerOperator Kop(mesh, LayerKind::double_layer, Space::P1, prob.rows);
  const DenseFamily V(Vop, contour), K(Kop, contour);
  BoundaryData zero{[](Index, double) { return 0.0; }, [](Index, double) { return 0.0; }};
  const auto sol = solve_gcq(prob, V, K, contour, steps, zero);
  for (size_t n = 0; n < steps.size(); ++n) {
    CHECK(sol.q[n].norm() == 0.0);
    CHECK(sol.u[n].norm() == 0.0);
  }
}

TEST_CASE("dense and compressed backends agree; probes are causal") {
  const auto mesh = unit_cube(1);
  const auto prob = make_problem(mesh, ProblemKind::dirichlet);
  const auto steps = uniform_steps(3.0, 10);
  const auto tab = radau_iia_2();
  const auto contour = build_contour(steps, tab);
  const LayerOperator Vop(mesh, LayerKind::single, Space::P0, prob.rows);
  const LayerOperator Kop(mesh, LayerKind::double_layer, Space::P1, prob.rows);
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(-1.5, 0.2, 0.3)};
  const LayerOperator PV(mesh, LayerKind::single, Space::P0, free_rows(pts));
  const LayerOperator PK(mesh, LayerKind::double_layer, Space::P1, free_rows(pts));
  const DenseFamily V(Vop, contour), K(Kop, contour), pv(PV, contour), pk(PK, contour);
  CompressionOptions co;
  const AcaFamily Va(Vop, contour, co), Ka(Kop, contour, co);
  const SmoothPulse pulse;
  const auto data = pulse_data(mesh, pulse);
  const auto sd = solve_gcq(prob, V, K, contour, steps, data, {}, {&pv, &pk});
  const auto sa = solve_gcq(prob, Va, Ka, contour, steps, data);
  const double ed = lmax(midpoint_errors(prob, steps, tab.c, sd.q, sd.u, pulse));
  const double ea = lmax(midpoint_errors(prob, steps, tab.c, sa.q, sa.u, pulse));
  CHECK(std::abs(ea - ed) <= 0.05 * ed);
  CHECK(sd.max_imag_ratio < 1e-8);

  // interior probe reproduces the incident field, the exterior one stays near zero
  double peak = 0.0, outside = 0.0, t = 0.0;
  const double arrival = (pts[0] - pulse.source).norm();
  for (size_t n = 0; n < steps.size(); ++n) {
    t += steps[n];
    peak = std::max(peak, sd.probes[n].row(0).cwiseAbs().maxCoeff());
    outside = std::max(outside, sd.probes[n].row(1).cwiseAbs().maxCoeff());
    if (t + steps[n] < arrival) CHECK(sd.probes[n].row(0).cwiseAbs().maxCoeff() <= 1e-3 * peak);
  }
  CHECK(std::abs(sd.probes.back()(0, 1) - pulse.value(pts[0], t)) < 0.05 * peak);
  CHECK(outside < 0.05 * peak);
}
