#include "tdbem/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tdbem/specfun.hpp"

namespace tdbem {

std::vector<Complex> Contour::all_nodes() const {
  std::vector<Complex> out(static_cast<size_t>(n_q));
  for (size_t l = 0; l < nodes.size(); ++l) {
    const Index i = node_index[l];
    out[static_cast<size_t>(i - 1)] = nodes[l];
    out[static_cast<size_t>(n_q - i)] = std::conj(nodes[l]);
  }
  return out;
}

std::vector<Complex> Contour::all_weights() const {
  std::vector<Complex> out(static_cast<size_t>(n_q));
  for (size_t l = 0; l < weights.size(); ++l) {
    const Index i = node_index[l];
    out[static_cast<size_t>(i - 1)] = weights[l];
    out[static_cast<size_t>(n_q - i)] = std::conj(weights[l]);
  }
  return out;
}

Index quadrature_count(Index n_steps, Index stages) {
  if (n_steps < 1) throw DomainError("number of steps must be positive");
  const double ln = std::log(static_cast<double>(n_steps));
  const double raw = stages > 1 ? n_steps * ln * ln : n_steps * ln;
  Index nq = static_cast<Index>(std::ceil(raw - 1e-9));
  nq = std::max<Index>(nq, 4);
  return nq + (nq % 2);
}

double step_ratio_q(double dt_min, double dt_max, const ButcherTableau& tab) {
  if (!(dt_min > 0.0) || dt_max < dt_min) throw DomainError("invalid step-size range");
  const Eigen::VectorXd lam = tab.spectrum().cwiseAbs();
  double q = dt_max * lam.maxCoeff() / (dt_min * lam.minCoeff());
  if (tab.stages() > 1) q *= 5.0;
  if (std::abs(q - 1.0) < 1e-12) q = 1.05;
  return q;
}

double contour_modulus(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("contour parameter q must exceed 1");
  const double w = std::sqrt(2.0 * q - 1.0);
  return (q - w) / (q + w);
}

Contour build_contour(double dt_min, double dt_max, const ButcherTableau& tab, Index n_q) {
  if (n_q < 2 || n_q % 2 != 0) throw DomainError("contour node count must be even");
  Contour out;
  out.q = step_ratio_q(dt_min, dt_max, tab);
  out.k = contour_modulus(out.q);
  out.dt_min = dt_min;
  out.dt_max = dt_max;
  out.n_q = n_q;
  const double q = out.q;
  const double k = out.k;
  const double m = k * k;
  const double K = elliptic_k(m);
  const double Kp = elliptic_k(1.0 - m);
  const double w = std::sqrt(2.0 * q - 1.0);
  const double d = dt_min * tab.contour_scale;
  const Complex I(0.0, 1.0);
  struct Node {
    Index pair;
    Index index;
    Complex s;
    Complex weight;
  };
  std::vector<Node> reps;
  for (Index l = 1; l <= n_q; ++l) {
    const Complex sigma(-K + (static_cast<double>(l) - 0.5) * 4.0 * K / static_cast<double>(n_q), 0.5 * Kp);
    const auto jt = jacobi_complex(sigma, m);
    const Complex den = 1.0 / k - jt.sn;
    if (std::abs(den) < 1e-10) throw DomainError("contour node at the pole of the conformal map");
    const Complex s = (w * (1.0 / k + jt.sn) / den - 1.0) / (d * (q - 1.0));
    const Complex ds = w / (d * (q - 1.0)) * 2.0 * jt.cn * jt.dn / (k * den * den);
    const Complex weight = 4.0 * K / (2.0 * static_cast<double>(n_q) * std::numbers::pi * I) * ds;
    if (s.imag() > 0.0) reps.push_back({std::min(l, n_q + 1 - l), l, s, weight});
  }
  if (static_cast<Index>(reps.size()) * 2 != n_q) throw DomainError("contour nodes are not conjugate-paired");
  std::sort(reps.begin(), reps.end(), [](const Node& a, const Node& b) { return a.pair < b.pair; });
  for (const auto& r : reps) {
    out.nodes.push_back(r.s);
    out.weights.push_back(r.weight);
    out.node_index.push_back(r.index);
  }
  return out;
}

Contour build_contour(const std::vector<double>& steps, const ButcherTableau& tab) {
  if (steps.empty()) throw DomainError("empty step schedule");
  const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
  return build_contour(*lo, *hi, tab, quadrature_count(static_cast<Index>(steps.size()), tab.stages()));
}

}  // namespace tdbem
