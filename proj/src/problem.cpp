#include "tdbem/problem.hpp"

#include <cmath>

namespace tdbem {

double SmoothPulse::value(const Vec3& y, double t) const {
  const double r = (y - source).norm();
  const double tau = t - r / c;
  if (tau <= 0.0) return 0.0;
  return tau * tau / r * std::exp(-c * tau);
}

double SmoothPulse::flux(const Vec3& y, const Vec3& n, double t) const {
  const Vec3 d = y - source;
  const double r = d.norm();
  const double tau = t - r / c;
  if (tau <= 0.0) return 0.0;
  const double e = std::exp(-c * tau);
  const double f = tau * tau * e;
  const double df = (2.0 * tau - c * tau * tau) * e;
  const double du_dr = -df / (c * r) - f / (r * r);
  return du_dr * d.dot(n) / r;
}

Part default_dirichlet_half(const TriangleMesh& mesh, Index t) {
  return mesh.normal(t).sum() > 0.0 ? Part::dirichlet : Part::neumann;
}

BoundaryProblem make_problem(const TriangleMesh& mesh, ProblemKind kind,
                             const std::function<Part(Index)>& triangle_part, QuadratureOptions opts) {
  BoundaryProblem p;
  p.mesh = &mesh;
  p.kind = kind;
  if (kind == ProblemKind::dirichlet) {
    p.part = boundary_partition(mesh, [](Index) { return Part::dirichlet; });
  } else if (triangle_part) {
    p.part = boundary_partition(mesh, triangle_part);
  } else {
    p.part = boundary_partition(mesh, [&](Index t) { return default_dirichlet_half(mesh, t); });
  }
  p.q_unknown = p.part.p0.select(Part::dirichlet);
  p.u_unknown = p.part.p1.select(Part::neumann);
  if (p.q_unknown.empty() && p.u_unknown.empty()) throw DomainError("boundary problem has no unknowns");
  p.rows = concat(centroid_rows(mesh, p.q_unknown), vertex_rows(mesh, p.u_unknown));

  const Eigen::VectorXd c = free_term(mesh, p.rows, opts);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < p.rows.size(); ++i) {
    const auto ri = static_cast<size_t>(i);
    if (p.rows.triangle[ri] >= 0) {
      for (Index v : mesh.triangle(p.rows.triangle[ri])) trip.emplace_back(i, v, c(i) / 3.0);
    } else {
      trip.emplace_back(i, p.rows.vertex[ri], c(i));
    }
  }
  p.C.resize(p.rows.size(), mesh.num_vertices());
  p.C.setFromTriplets(trip.begin(), trip.end());
  return p;
}

BoundaryData pulse_data(const TriangleMesh& mesh, const SmoothPulse& pulse) {
  BoundaryData d;
  d.pressure = [&mesh, pulse](Index v, double t) { return pulse.value(mesh.vertex(v), t); };
  d.flux = [&mesh, pulse](Index t, double time) {
    const auto& tri = mesh.triangle(t);
    const Vec3& a = mesh.vertex(tri[0]);
    const Vec3& b = mesh.vertex(tri[1]);
    const Vec3& c = mesh.vertex(tri[2]);
    double acc = 0.0;
    for (const auto& p : regular_points(6, mesh.area(t))) {
      acc += p.w * pulse.flux(a + p.xi * (b - a) + p.eta * (c - a), mesh.normal(t), time);
    }
    return acc / mesh.area(t);
  };
  return d;
}

Eigen::VectorXd midpoint_values(const std::vector<Eigen::MatrixXd>& hist, size_t n, const Eigen::VectorXd& stage_c) {
  // Lagrange weights at theta = 1/2 through theta = 0, c_1, ..., c_m (c_i = 0 skipped)
  std::vector<double> nodes{0.0};
  std::vector<Index> stage_of{-1};
  for (Index a = 0; a < stage_c.size(); ++a) {
    if (stage_c(a) > 0.0) {
      nodes.push_back(stage_c(a));
      stage_of.push_back(a);
    }
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(hist[n].rows());
  for (size_t i = 0; i < nodes.size(); ++i) {
    double l = 1.0;
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (j != i) l *= (0.5 - nodes[j]) / (nodes[i] - nodes[j]);
    }
    if (i > 0) {
      v += l * hist[n].col(stage_of[i]);
    } else if (n > 0) {
      v += l * hist[n - 1].col(stage_c.size() - 1);
    }
  }
  return v;
}

double TraceError::total() const { return std::sqrt(flux * flux + pressure * pressure); }

std::vector<TraceError> midpoint_errors(const BoundaryProblem& prob, const std::vector<double>& steps,
                                        const Eigen::VectorXd& stage_c, const std::vector<Eigen::MatrixXd>& q,
                                        const std::vector<Eigen::MatrixXd>& u, const SmoothPulse& pulse) {
  const TriangleMesh& mesh = *prob.mesh;
  if (q.size() != steps.size() || u.size() != steps.size()) throw DomainError("trace history length mismatch");
  std::vector<char> neumann_tri(static_cast<size_t>(mesh.num_triangles()), 0);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    neumann_tri[static_cast<size_t>(t)] = prob.part.p0.part[static_cast<size_t>(t)] == Part::neumann;
  }

  std::vector<TraceError> out;
  double t0 = 0.0;
  for (size_t n = 0; n < steps.size(); ++n) {
    const double dt = steps[n];
    const double tm = t0 + 0.5 * dt;
    const Eigen::VectorXd qm = midpoint_values(q, n, stage_c);
    const Eigen::VectorXd um = midpoint_values(u, n, stage_c);
    TraceError e;
    for (Index t : prob.q_unknown) {
      const double qh = qm(t);
      const auto& tri = mesh.triangle(t);
      const Vec3& a = mesh.vertex(tri[0]);
      const Vec3& b = mesh.vertex(tri[1]);
      const Vec3& c = mesh.vertex(tri[2]);
      for (const auto& p : regular_points(6, mesh.area(t))) {
        const double d = qh - pulse.flux(a + p.xi * (b - a) + p.eta * (c - a), mesh.normal(t), tm);
        e.flux += p.w * d * d;
      }
    }
    if (!prob.u_unknown.empty()) {
      for (Index t = 0; t < mesh.num_triangles(); ++t) {
        if (!neumann_tri[static_cast<size_t>(t)]) continue;
        const auto& tri = mesh.triangle(t);
        const std::array<double, 3> uh{um(tri[0]), um(tri[1]), um(tri[2])};
        const Vec3& a = mesh.vertex(tri[0]);
        const Vec3& b = mesh.vertex(tri[1]);
        const Vec3& c = mesh.vertex(tri[2]);
        for (const auto& p : regular_points(6, mesh.area(t))) {
          const double v = (1.0 - p.xi - p.eta) * uh[0] + p.xi * uh[1] + p.eta * uh[2];
          const double d = v - pulse.value(a + p.xi * (b - a) + p.eta * (c - a), tm);
          e.pressure += p.w * d * d;
        }
      }
    }
    e.flux = std::sqrt(e.flux);
    e.pressure = std::sqrt(e.pressure);
    out.push_back(e);
    t0 += dt;
  }
  return out;
}

double lmax(const std::vector<TraceError>& errors) {
  double m = 0.0;
  for (const auto& e : errors) m = std::max(m, e.total());
  return m;
}

double eoc(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace tdbem
