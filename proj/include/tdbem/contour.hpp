#pragma once

#include <vector>

#include "tdbem/rk.hpp"
#include "tdbem/types.hpp"

namespace tdbem {

// Quadrature on the contour enclosing the spectra of (dt_n A)^{-1}. Only the
// representatives with Im s > 0 are stored; each stands for a conjugate pair.
struct Contour {
  double q = 0.0;
  double k = 0.0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  Index n_q = 0;
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  // 1-based position of each representative among all n_q nodes
  std::vector<Index> node_index;

  Index representatives() const { return static_cast<Index>(nodes.size()); }
  std::vector<Complex> all_nodes() const;
  std::vector<Complex> all_weights() const;
};

// ceil(N ln^2 N) for multistage methods, ceil(N ln N) for one stage; even, at least 4
Index quadrature_count(Index n_steps, Index stages);

// q from the step-size and stage-spectrum extremes; 1 maps to 1.05
double step_ratio_q(double dt_min, double dt_max, const ButcherTableau& tab);

double contour_modulus(double q);

Contour build_contour(double dt_min, double dt_max, const ButcherTableau& tab, Index n_q);
Contour build_contour(const std::vector<double>& steps, const ButcherTableau& tab);

}  // namespace tdbem
