#pragma once

#include <functional>
#include <vector>

#include "tdbem/aca.hpp"

namespace tdbem {

// face (x) fiber; the fiber runs over the contour representatives
struct FrequencyCross {
  BlockMatrix face;
  Eigen::VectorXcd fiber;
  Index i = 0;
  Index j = 0;
  Index k = 0;
  Complex pivot = 0.0;
};

struct FaceOracle {
  Index frequencies = 0;
  std::function<BlockMatrix(Index k)> face;                 // block at frequency k
  std::function<Eigen::VectorXcd(Index i, Index j)> fiber;  // entry (i,j) at every frequency
};

struct CrossApproximation {
  std::vector<FrequencyCross> crosses;
  bool capped = false;  // stopped by the rank cap rather than the tolerance

  Index rank() const { return static_cast<Index>(crosses.size()); }
  std::vector<Index> frequencies() const;
  Eigen::MatrixXcd slice(Index k) const;
  double bytes() const;
};

struct FacePivot {
  Index i = -1;
  Index j = -1;
  Complex value = 0.0;
  bool empty() const { return i < 0; }
};

// argmax |entry|; low-rank faces are densified transiently
FacePivot face_pivot(const BlockMatrix& face);

// Adaptive cross approximation over the frequency axis, starting at
// frequency 0; the next frequency is the largest unused fiber entry. Stops when |H_l|_F |f_l| <= eps |C_l|_F and drops that cross.
// Low-rank residual faces are recompressed with face_eps. r_max < 0: no cap.
CrossApproximation three_d_aca(const FaceOracle& oracle, double eps, double face_eps, Index r_max = -1);

// |C|_F^2 = sum_{d,d'} <H_d, H_d'> <f_d, f_d'>, updated as crosses are appended
class FrobeniusRecursion {
 public:
  void push(const FrequencyCross& c);
  double value() const;

 private:
  std::vector<const FrequencyCross*> crosses_;
  double sum_ = 0.0;
};

double recursive_frobenius(const std::vector<FrequencyCross>& crosses);

// sum_d face_d (W f_d) for weights W (cols x frequencies)
Eigen::VectorXcd separated_convolution(const std::vector<FrequencyCross>& crosses, const Eigen::MatrixXcd& W);
// sum_d face_d (V diag(f_d) E) for factored weights V (cols x freq), E (freq x stages)
Eigen::MatrixXcd separated_convolution(const std::vector<FrequencyCross>& crosses, const Eigen::MatrixXcd& V,
                                       const Eigen::MatrixXcd& E);

}  // namespace tdbem
