#include "tdbem/history.hpp"

namespace tdbem {

namespace {

Eigen::MatrixXcd resolvent(const ButcherTableau& tab, double dt, Complex s) {
  const Index m = tab.stages();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(m, m) - (dt * s) * tab.A.cast<Complex>();
  return M.inverse();
}

}  // namespace

HistoryState::HistoryState(const Contour& contour, const ButcherTableau& tab, Index dofs)
    : contour_(contour), tab_(tab), beta_(tab.bt_ainv().transpose()), dofs_(dofs) {
  x_.assign(static_cast<size_t>(contour.representatives()), Eigen::MatrixXcd::Zero(dofs, tab.stages()));
}

void HistoryState::advance(double dt, const Eigen::Ref<const Eigen::MatrixXd>& stages) {
  if (stages.rows() != dofs_ || stages.cols() != tab_.stages()) {
    throw DomainError("history stage data has wrong shape");
  }
  // dt g A^T, shared by all nodes
  const Eigen::MatrixXcd rhs = (dt * stages * tab_.A.transpose()).cast<Complex>();
  const Eigen::VectorXcd betac = beta_.cast<Complex>();
  for (Index l = 0; l < contour_.representatives(); ++l) {
    auto& x = x_[static_cast<size_t>(l)];
    const Eigen::MatrixXcd Rt = resolvent(tab_, dt, contour_.nodes[static_cast<size_t>(l)]).transpose();
    Eigen::MatrixXcd y = rhs;
    const Eigen::VectorXcd last = x * betac;
    y.colwise() += last;
    x.noalias() = y * Rt;
  }
  ++steps_;
}

ConvolutionWeights HistoryState::weights(double dt_next) const {
  const Index nr = contour_.representatives();
  const Index m = tab_.stages();
  ConvolutionWeights w;
  w.V.resize(dofs_, nr);
  w.E.resize(nr, m);
  const Eigen::VectorXcd betac = beta_.cast<Complex>();
  for (Index l = 0; l < nr; ++l) {
    const auto sl = static_cast<size_t>(l);
    w.V.col(l) = contour_.weights[sl] * (x_[sl] * betac);
    w.E.row(l) = (resolvent(tab_, dt_next, contour_.nodes[sl]) * Eigen::VectorXcd::Ones(m)).transpose();
  }
  return w;
}

Eigen::MatrixXcd to_eigenbasis(const StageSpectrum& sp, const Eigen::Ref<const Eigen::MatrixXcd>& g) {
  return g * sp.T_inv.transpose();
}

Eigen::MatrixXcd from_eigenbasis(const StageSpectrum& sp, const Eigen::Ref<const Eigen::MatrixXcd>& z) {
  return z * sp.T.transpose();
}

Eigen::MatrixXd scalar_gcq(const std::function<Complex(Complex)>& kernel, const std::vector<double>& steps,
                           const ButcherTableau& tab, const std::function<double(double)>& g) {
  const Contour contour = build_contour(steps, tab);
  const Index m = tab.stages();
  const Index n = static_cast<Index>(steps.size());
  SpectrumCache spectra(tab);
  HistoryState hist(contour, tab, 1);
  Eigen::MatrixXd out(n, m);
  double t = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double dt = steps[static_cast<size_t>(i)];
    Eigen::MatrixXd G(1, m);
    for (Index a = 0; a < m; ++a) G(0, a) = g(t + tab.c(a) * dt);
    const StageSpectrum& sp = spectra.get(dt);
    Eigen::MatrixXcd z = to_eigenbasis(sp, G.cast<Complex>());
    for (Index a = 0; a < m; ++a) z(0, a) *= kernel(sp.mu(a));
    Eigen::MatrixXd f = from_eigenbasis(sp, z).real();
    if (hist.steps() > 0) {
      const ConvolutionWeights w = hist.weights(dt);
      Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m);
      for (Index l = 0; l < contour.representatives(); ++l) {
        acc += kernel(contour.nodes[static_cast<size_t>(l)]) * w.V(0, l) * w.E.row(l);
      }
      f += 2.0 * acc.real();
    }
    out.row(i) = f;
    hist.advance(dt, G);
    t += dt;
  }
  return out;
}

std::vector<double> uniform_steps(double end, Index n) {
  if (n < 1 || !(end > 0.0)) throw DomainError("invalid uniform schedule");
  return std::vector<double>(static_cast<size_t>(n), end / static_cast<double>(n));
}

std::vector<double> step_times(const std::vector<double>& steps) {
  std::vector<double> t(steps.size() + 1, 0.0);
  for (size_t i = 0; i < steps.size(); ++i) t[i + 1] = t[i] + steps[i];
  return t;
}

}  // namespace tdbem
