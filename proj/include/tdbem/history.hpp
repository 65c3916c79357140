#pragma once

#include <functional>
#include <vector>

#include "tdbem/contour.hpp"
#include "tdbem/rk.hpp"

namespace tdbem {

// Convolution weights of one step in factored form: W_l = V.col(l) * E.row(l).
// The history contribution of an operator family Op(s) is
// 2 Re sum_l Op(s_l) V.col(l) E.row(l).
struct ConvolutionWeights {
  Eigen::MatrixXcd V;  // dofs x representatives, includes the contour weight
  Eigen::MatrixXcd E;  // representatives x stages
};

// Per-node ODE states x_n(s_l) of the contour representation.
class HistoryState {
 public:
  HistoryState(const Contour& contour, const ButcherTableau& tab, Index dofs);

  // x_n(s) = (I - dt s A)^{-1} ((b^T A^{-1} x_{n-1}) 1 + dt A g_n); stages is dofs x m
  void advance(double dt, const Eigen::Ref<const Eigen::MatrixXd>& stages);
  ConvolutionWeights weights(double dt_next) const;
  Index steps() const { return steps_; }
  Index dofs() const { return dofs_; }

 private:
  const Contour& contour_;
  ButcherTableau tab_;
  Eigen::VectorXd beta_;
  Index dofs_;
  Index steps_ = 0;
  std::vector<Eigen::MatrixXcd> x_;
};

// Z = G T^{-T}: stage data in the eigenbasis of (dt A)^{-1}, column k pairs with mu_k
Eigen::MatrixXcd to_eigenbasis(const StageSpectrum& sp, const Eigen::Ref<const Eigen::MatrixXcd>& g);
// inverse map Y = Z T^T
Eigen::MatrixXcd from_eigenbasis(const StageSpectrum& sp, const Eigen::Ref<const Eigen::MatrixXcd>& z);

// Stage values (N x m) of K(d_t) g for a scalar transfer function K.
Eigen::MatrixXd scalar_gcq(const std::function<Complex(Complex)>& kernel, const std::vector<double>& steps,
                           const ButcherTableau& tab, const std::function<double(double)>& g);

// uniform schedule of n steps on [0, end]
std::vector<double> uniform_steps(double end, Index n);
// t_n for n = 0..N
std::vector<double> step_times(const std::vector<double>& steps);

}  // namespace tdbem
