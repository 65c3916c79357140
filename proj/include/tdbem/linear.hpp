#pragma once

#include <functional>
#include <memory>

#include "tdbem/types.hpp"

namespace tdbem {

// y = A x for complex vectors.
class LinearMap {
 public:
  virtual ~LinearMap() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const = 0;
  // dense representation when one is held, else nullptr
  virtual const Eigen::MatrixXcd* dense() const { return nullptr; }
};

class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const override { return m_ * x; }
  const Eigen::MatrixXcd* dense() const override { return &m_; }

 private:
  Eigen::MatrixXcd m_;
};

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
  int restarts = 0;
};

// BiCGstab with relative residual tolerance; restarts once on breakdown,
// throws ConvergenceError when max_iter is exhausted.
Eigen::VectorXcd bicgstab(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& A, const Eigen::VectorXcd& b,
                          const Eigen::VectorXcd& x0, double tol, int max_iter, SolveInfo* info = nullptr);

}  // namespace tdbem
