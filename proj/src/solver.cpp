#include "tdbem/solver.hpp"

#include <chrono>
#include <cstdio>
#include <map>

#include <Eigen/LU>

namespace tdbem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Operators at the stage eigenvalues of one step size.
struct StepOperators {
  const StageSpectrum* sp = nullptr;
  std::vector<std::shared_ptr<const LinearMap>> V, K, PV, PK;
  std::vector<std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>>> lu;
};

std::string dt_key(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", dt);
  return buf;
}

}  // namespace

Solution solve_gcq(const BoundaryProblem& prob, const OperatorFamily& V, const OperatorFamily& K,
                   const Contour& contour, const std::vector<double>& steps, const BoundaryData& data,
                   const SolverOptions& opts, const ProbeOperators& probes) {
  const TriangleMesh& mesh = *prob.mesh;
  const Index nt = mesh.num_triangles();
  const Index nv = mesh.num_vertices();
  const Index nrow = prob.rows.size();
  const Index nq = static_cast<Index>(prob.q_unknown.size());
  const Index nu = static_cast<Index>(prob.u_unknown.size());
  const ButcherTableau& tab = opts.tableau;
  const Index m = tab.stages();
  if (V.rows() != nrow || K.rows() != nrow || V.cols() != nt || K.cols() != nv) {
    throw DomainError("operator families do not match the boundary problem");
  }
  const bool with_probes = probes.V != nullptr && probes.K != nullptr;
  if (with_probes && (probes.V->rows() != probes.K->rows() || probes.V->cols() != nt || probes.K->cols() != nv)) {
    throw DomainError("probe operators do not match the mesh");
  }

  const Eigen::SparseMatrix<Complex> C = prob.C.cast<Complex>();
  Eigen::MatrixXcd C_u = Eigen::MatrixXcd::Zero(nrow, nu);
  for (Index j = 0; j < nu; ++j) C_u.col(j) = prob.C.col(prob.u_unknown[static_cast<size_t>(j)]).toDense().cast<Complex>();
  std::vector<Index> dirichlet_vertices = prob.part.p1.select(Part::dirichlet);
  std::vector<Index> neumann_triangles = prob.part.p0.select(Part::neumann);

  auto scatter = [&](const Eigen::VectorXcd& y, Eigen::VectorXcd& xq, Eigen::VectorXcd& xu) {
    xq.setZero(nt);
    xu.setZero(nv);
    for (Index j = 0; j < nq; ++j) xq(prob.q_unknown[static_cast<size_t>(j)]) = y(j);
    for (Index j = 0; j < nu; ++j) xu(prob.u_unknown[static_cast<size_t>(j)]) = y(nq + j);
  };

  SpectrumCache spectra(tab);
  std::map<std::string, StepOperators> cache;
  auto operators_for = [&](double dt) -> StepOperators& {
    auto [it, fresh] = cache.try_emplace(dt_key(dt));
    StepOperators& ops = it->second;
    if (!fresh) return ops;
    ops.sp = &spectra.get(dt);
    ops.V.resize(static_cast<size_t>(m));
    ops.K.resize(static_cast<size_t>(m));
    ops.PV.resize(static_cast<size_t>(m));
    ops.PK.resize(static_cast<size_t>(m));
    ops.lu.resize(static_cast<size_t>(m));
    for (Index k = 0; k < m; ++k) {
      if (ops.sp->partner[static_cast<size_t>(k)] < k) continue;
      const Complex mu = ops.sp->mu(k);
      const auto sk = static_cast<size_t>(k);
      ops.V[sk] = V.at(mu);
      ops.K[sk] = K.at(mu);
      if (with_probes) {
        ops.PV[sk] = probes.V->at(mu);
        ops.PK[sk] = probes.K->at(mu);
      }
      const Eigen::MatrixXcd* Vd = ops.V[sk]->dense();
      const Eigen::MatrixXcd* Kd = ops.K[sk]->dense();
      if (opts.direct && Vd != nullptr && Kd != nullptr) {
        Eigen::MatrixXcd A(nrow, nq + nu);
        for (Index j = 0; j < nq; ++j) A.col(j) = Vd->col(prob.q_unknown[static_cast<size_t>(j)]);
        for (Index j = 0; j < nu; ++j) A.col(nq + j) = -Kd->col(prob.u_unknown[static_cast<size_t>(j)]) - C_u.col(j);
        ops.lu[sk] = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(A);
      }
    }
    return ops;
  };

  Solution sol;
  sol.steps = steps;
  HistoryState hist_q(contour, tab, nt);
  HistoryState hist_u(contour, tab, nv);
  std::vector<Eigen::VectorXcd> warm(static_cast<size_t>(m));
  double t = 0.0;
  for (double dt : steps) {
    auto t0 = Clock::now();
    StepOperators& ops = operators_for(dt);
    const StageSpectrum& sp = *ops.sp;
    sol.timings.operators += seconds_since(t0);

    // given data at the stage times
    Eigen::MatrixXd Gq = Eigen::MatrixXd::Zero(nt, m);
    Eigen::MatrixXd Gu = Eigen::MatrixXd::Zero(nv, m);
    for (Index a = 0; a < m; ++a) {
      const double ta = t + tab.c(a) * dt;
      for (Index tri : neumann_triangles) Gq(tri, a) = data.flux(tri, ta);
      for (Index v : dirichlet_vertices) Gu(v, a) = data.pressure(v, ta);
    }

    t0 = Clock::now();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nrow, m);
    Eigen::MatrixXd PH;
    ConvolutionWeights wq, wu;
    if (hist_q.steps() > 0) {
      wq = hist_q.weights(dt);
      wu = hist_u.weights(dt);
      H = V.convolve(wq) - K.convolve(wu);
      if (with_probes) PH = probes.V->convolve(wq) - probes.K->convolve(wu);
    }
    sol.timings.convolution += seconds_since(t0);

    t0 = Clock::now();
    const Eigen::MatrixXcd HZ = to_eigenbasis(sp, H.cast<Complex>());
    const Eigen::MatrixXcd Zgq = to_eigenbasis(sp, Gq.cast<Complex>());
    const Eigen::MatrixXcd Zgu = to_eigenbasis(sp, Gu.cast<Complex>());
    Eigen::MatrixXcd Zq = Zgq;
    Eigen::MatrixXcd Zu = Zgu;
    for (Index k = 0; k < m; ++k) {
      const auto sk = static_cast<size_t>(k);
      const Index partner = sp.partner[sk];
      if (partner < k) {
        Zq.col(k) = Zq.col(partner).conjugate();
        Zu.col(k) = Zu.col(partner).conjugate();
        continue;
      }
      const LinearMap& Vk = *ops.V[sk];
      const LinearMap& Kk = *ops.K[sk];
      const Eigen::VectorXcd zgu = Zgu.col(k);
      const Eigen::VectorXcd rhs = -HZ.col(k) - Vk.apply(Zgq.col(k)) + Kk.apply(zgu) + C * zgu;
      Eigen::VectorXcd y;
      SolveInfo info;
      if (ops.lu[sk]) {
        y = ops.lu[sk]->solve(rhs);
        info.residual = 0.0;
      } else {
        auto apply = [&](const Eigen::VectorXcd& x) {
          Eigen::VectorXcd xq, xu;
          scatter(x, xq, xu);
          Eigen::VectorXcd r = Vk.apply(xq) - Kk.apply(xu);
          r -= C * xu;
          return r;
        };
        y = bicgstab(apply, rhs, warm[sk], opts.tol, opts.max_iter, &info);
        warm[sk] = y;
      }
      sol.solves.push_back(info);
      Eigen::VectorXcd xq, xu;
      scatter(y, xq, xu);
      Zq.col(k) += xq;
      Zu.col(k) += xu;
    }
    const Eigen::MatrixXcd q = from_eigenbasis(sp, Zq);
    const Eigen::MatrixXcd u = from_eigenbasis(sp, Zu);
    const double scale = std::max({q.real().cwiseAbs().maxCoeff(), u.real().cwiseAbs().maxCoeff(), 1e-300});
    sol.max_imag_ratio = std::max(
        {sol.max_imag_ratio, q.imag().cwiseAbs().maxCoeff() / scale, u.imag().cwiseAbs().maxCoeff() / scale});
    sol.q.push_back(q.real());
    sol.u.push_back(u.real());

    if (with_probes) {
      Eigen::MatrixXcd PZ(probes.V->rows(), m);
      for (Index k = 0; k < m; ++k) {
        const auto sk = static_cast<size_t>(k);
        const Index partner = sp.partner[sk];
        if (partner < k) {
          PZ.col(k) = PZ.col(partner).conjugate();
          continue;
        }
        PZ.col(k) = ops.PV[sk]->apply(Zq.col(k)) - ops.PK[sk]->apply(Zu.col(k));
      }
      Eigen::MatrixXd P = from_eigenbasis(sp, PZ).real();
      if (PH.size() > 0) P += PH;
      sol.probes.push_back(P);
    }
    sol.timings.solve += seconds_since(t0);

    hist_q.advance(dt, sol.q.back());
    hist_u.advance(dt, sol.u.back());
    t += dt;
  }
  return sol;
}

}  // namespace tdbem
