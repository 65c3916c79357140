#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tdbem/htree.hpp"
#include "tdbem/layer_operator.hpp"
#include "tdbem/linear.hpp"

namespace tdbem {

// block ~ U V^H
struct LowRankBlock {
  Eigen::MatrixXcd U;
  Eigen::MatrixXcd V;

  Index rank() const { return U.cols(); }
  Eigen::MatrixXcd dense() const { return U * V.adjoint(); }
};

// Dense or low-rank block storage.
struct BlockMatrix {
  bool low_rank = false;
  Eigen::MatrixXcd D;
  LowRankBlock L;

  Index rows() const { return low_rank ? L.U.rows() : D.rows(); }
  Index cols() const { return low_rank ? L.V.rows() : D.cols(); }
  Eigen::MatrixXcd dense() const { return low_rank ? L.dense() : D; }
  // block * X
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& X) const;
  double bytes() const;
  double norm() const;
};

// Frobenius inner product <A, B> = trace(B^H A)
Complex frobenius_inner(const BlockMatrix& A, const BlockMatrix& B);

using RowOracle = std::function<Eigen::VectorXcd(Index i)>;  // residual-free row i of the block
using ColOracle = std::function<Eigen::VectorXcd(Index j)>;

// Partially pivoted ACA; stops when |u_k| |v_k| <= eps |S_k|_F and drops that cross.
LowRankBlock aca(Index rows, Index cols, const RowOracle& row, const ColOracle& col, double eps);
LowRankBlock aca(const std::function<Complex(Index, Index)>& entry, Index rows, Index cols, double eps);

// QR of both factors and SVD of the core, truncated at sigma_k <= eps sigma_1
LowRankBlock recompress(const LowRankBlock& block, double eps);

// Block-partitioned matrix aligned with a block cluster tree.
class HMatrix final : public LinearMap {
 public:
  HMatrix(std::shared_ptr<const ClusterTree> rows, std::shared_ptr<const ClusterTree> cols,
          std::shared_ptr<const BlockTree> blocks, std::vector<BlockMatrix> data);
  Index rows() const override { return static_cast<Index>(rows_->perm.size()); }
  Index cols() const override { return static_cast<Index>(cols_->perm.size()); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const override;
  const std::vector<BlockMatrix>& blocks() const { return data_; }
  Eigen::MatrixXcd to_dense() const;
  double bytes() const;

 private:
  std::shared_ptr<const ClusterTree> rows_;
  std::shared_ptr<const ClusterTree> cols_;
  std::shared_ptr<const BlockTree> tree_;
  std::vector<BlockMatrix> data_;
};

// Block (I, J) of op at s: dense when inadmissible, recompressed ACA otherwise.
BlockMatrix assemble_block(const LayerOperator& op, const std::vector<Index>& I, const std::vector<Index>& J,
                           bool admissible, Complex s, double eps);

// Low-rank blocks whose factors outweigh the dense block are stored dense.
std::shared_ptr<HMatrix> build_hmatrix(const LayerOperator& op, std::shared_ptr<const ClusterTree> rows,
                                       std::shared_ptr<const ClusterTree> cols,
                                       std::shared_ptr<const BlockTree> blocks, Complex s, double eps);

}  // namespace tdbem
