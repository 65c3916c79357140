#pragma once

#include <map>
#include <mutex>
#include <string>

#include "tdbem/types.hpp"

namespace tdbem {

struct ButcherTableau {
  std::string name;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  // contour map scale relative to the smallest step; the contour has to
  // surround the region where |R(dt s)| > 1 for the node recursion to stay bounded
  double contour_scale = 1.0;

  Index stages() const { return b.size(); }
  // b^T A^{-1}; equals the last unit vector for stiffly accurate methods
  Eigen::RowVectorXd bt_ainv() const;
  // eigenvalues of A
  Eigen::VectorXcd spectrum() const;
  // R(z) = 1 + z b^T (I - zA)^{-1} 1
  Complex stability_function(Complex z) const;
  // invertible A and b^T A^{-1} = e_m within 1e-13, c_m = 1
  void validate() const;
};

ButcherTableau radau_iia_2();
ButcherTableau implicit_euler();
ButcherTableau tableau_by_name(const std::string& name);

// Eigen-decomposition of (dt A)^{-1} = T diag(mu) T^{-1}.
struct StageSpectrum {
  double dt = 0.0;
  Eigen::VectorXcd mu;
  Eigen::MatrixXcd T;
  Eigen::MatrixXcd T_inv;
  // index of the eigenvalue conjugate to mu[k], or k itself for real ones
  std::vector<Index> partner;
};

StageSpectrum stage_spectrum(const ButcherTableau& tab, double dt);

// Spectra keyed by the step size quantized to 12 significant digits.
class SpectrumCache {
 public:
  explicit SpectrumCache(ButcherTableau tab) : tab_(std::move(tab)) {}
  const StageSpectrum& get(double dt);
  const ButcherTableau& tableau() const { return tab_; }

 private:
  ButcherTableau tab_;
  std::mutex mutex_;
  std::map<std::string, StageSpectrum> cache_;
};

}  // namespace tdbem
