#include "tdbem/rk.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

namespace tdbem {

Eigen::RowVectorXd ButcherTableau::bt_ainv() const {
  return A.transpose().fullPivLu().solve(b).transpose();
}

Eigen::VectorXcd ButcherTableau::spectrum() const {
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues();
}

Complex ButcherTableau::stability_function(Complex z) const {
  const Index m = stages();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(m, m) - z * A.cast<Complex>();
  Eigen::VectorXcd x = M.fullPivLu().solve(Eigen::VectorXcd::Ones(m));
  return 1.0 + z * (b.cast<Complex>().transpose() * x)(0);
}

void ButcherTableau::validate() const {
  const Index m = stages();
  if (m == 0 || A.rows() != m || A.cols() != m || c.size() != m) {
    throw DomainError("inconsistent Butcher tableau dimensions");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw DomainError("Butcher matrix A is singular");
  Eigen::RowVectorXd w = bt_ainv();
  Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(m);
  e(m - 1) = 1.0;
  if ((w - e).lpNorm<Eigen::Infinity>() > 1e-13) {
    throw DomainError("tableau " + name + " is not stiffly accurate");
  }
  if (std::abs(c(m - 1) - 1.0) > 1e-13) throw DomainError("last abscissa must be 1");
}

ButcherTableau radau_iia_2() {
  ButcherTableau t;
  t.name = "radau2";
  t.A.resize(2, 2);
  t.A << 5.0 / 12.0, -1.0 / 12.0, 3.0 / 4.0, 1.0 / 4.0;
  t.b.resize(2);
  t.b << 3.0 / 4.0, 1.0 / 4.0;
  t.c.resize(2);
  t.c << 1.0 / 3.0, 1.0;
  t.contour_scale = 0.25;
  return t;
}

ButcherTableau implicit_euler() {
  ButcherTableau t;
  t.name = "euler";
  t.A = Eigen::MatrixXd::Ones(1, 1);
  t.b = Eigen::VectorXd::Ones(1);
  t.c = Eigen::VectorXd::Ones(1);
  return t;
}

ButcherTableau tableau_by_name(const std::string& name) {
  if (name == "radau2" || name == "radau_iia_2") return radau_iia_2();
  if (name == "euler" || name == "implicit_euler") return implicit_euler();
  throw DomainError("unknown Runge-Kutta method: " + name);
}

StageSpectrum stage_spectrum(const ButcherTableau& tab, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step size must be positive");
  const Index m = tab.stages();
  Eigen::MatrixXd B = (dt * tab.A).inverse();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B.cast<Complex>());
  StageSpectrum out;
  out.dt = dt;
  out.mu = es.eigenvalues();
  out.T = es.eigenvectors();
  out.partner.resize(m);
  for (Index k = 0; k < m; ++k) {
    out.partner[k] = k;
    for (Index l = 0; l < m; ++l) {
      if (l != k && std::abs(out.mu(l) - std::conj(out.mu(k))) <= 1e-12 * std::abs(out.mu(k))) {
        out.partner[k] = l;
      }
    }
  }
  // conjugate pairs get conjugate eigenvectors so real data maps to conjugate columns
  for (Index k = 0; k < m; ++k) {
    const Index l = out.partner[k];
    if (l > k) {
      out.mu(l) = std::conj(out.mu(k));
      out.T.col(l) = out.T.col(k).conjugate();
    } else if (l == k) {
      Index big = 0;
      out.T.col(k).cwiseAbs().maxCoeff(&big);
      const Complex phase = out.T(big, k) / std::abs(out.T(big, k));
      out.mu(k) = out.mu(k).real();
      out.T.col(k) = (out.T.col(k) / phase).real().cast<Complex>();
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.T);
  if (!lu.isInvertible()) throw DomainError("defective stage matrix");
  out.T_inv = lu.inverse();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.T);
  const auto& sv = svd.singularValues();
  if (sv(0) > 1e12 * sv(sv.size() - 1)) throw DomainError("ill-conditioned stage eigenbasis");
  return out;
}

const StageSpectrum& SpectrumCache::get(double dt) {
  char key[64];
  std::snprintf(key, sizeof key, "%.11e", dt);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, stage_spectrum(tab_, dt)).first;
  return it->second;
}

}  // namespace tdbem
