#include "tdbem/linear.hpp"

#include <cmath>

namespace tdbem {

Eigen::VectorXcd bicgstab(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& A, const Eigen::VectorXcd& b,
                          const Eigen::VectorXcd& x0, double tol, int max_iter, SolveInfo* info) {
  SolveInfo local;
  SolveInfo& inf = info ? *info : local;
  inf = {};
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXcd::Zero(b.size());
  Eigen::VectorXcd x = x0.size() == b.size() ? x0 : Eigen::VectorXcd::Zero(b.size());
  Eigen::VectorXcd r = b - A(x);
  inf.residual = r.norm() / bnorm;
  if (inf.residual <= tol) return x;
  bool restarted = false;
  while (true) {
    const Eigen::VectorXcd r0 = r;
    Complex rho = 1.0, alpha = 1.0, omega = 1.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b.size());
    Eigen::VectorXcd p = v;
    bool breakdown = false;
    while (inf.iterations < max_iter) {
      ++inf.iterations;
      const Complex rho_new = r0.dot(r);
      if (std::abs(rho_new) < 1e-300 || std::abs(omega) < 1e-300) {
        breakdown = true;
        break;
      }
      const Complex beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      p = r + beta * (p - omega * v);
      v = A(p);
      const Complex r0v = r0.dot(v);
      if (std::abs(r0v) < 1e-300) {
        breakdown = true;
        break;
      }
      alpha = rho / r0v;
      const Eigen::VectorXcd sv = r - alpha * v;
      if (sv.norm() / bnorm <= tol) {
        x += alpha * p;
        r = sv;
        inf.residual = r.norm() / bnorm;
        return x;
      }
      const Eigen::VectorXcd t = A(sv);
      const double tt = t.squaredNorm();
      omega = tt > 0.0 ? t.dot(sv) / tt : 0.0;
      x += alpha * p + omega * sv;
      r = sv - omega * t;
      inf.residual = r.norm() / bnorm;
      if (inf.residual <= tol) return x;
    }
    if (!breakdown || restarted) break;
    restarted = true;
    ++inf.restarts;
    r = b - A(x);
  }
  throw ConvergenceError("BiCGstab did not converge: residual " + std::to_string(inf.residual) + " after " +
                         std::to_string(inf.iterations) + " iterations");
}

}  // namespace tdbem
