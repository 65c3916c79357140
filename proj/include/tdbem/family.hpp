#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tdbem/contour.hpp"
#include "tdbem/history.hpp"
#include "tdbem/layer_operator.hpp"
#include "tdbem/linear.hpp"
#include "tdbem/tensor3.hpp"

namespace tdbem {

// Per-block compression record for reports.
struct BlockStat {
  Index rows = 0;
  Index cols = 0;
  bool admissible = false;
  Index rank = 0;
  bool capped = false;
  std::vector<Index> frequencies;  // representative indices in selection order
  double bytes = 0.0;
};

struct FamilyStats {
  std::string name;
  double compressed_bytes = 0.0;
  double shared_bytes = 0.0;  // part of compressed_bytes also counted by another family
  double dense_bytes = 0.0;
  std::vector<BlockStat> blocks;
  std::vector<Index> frequency_histogram;  // selections per representative
  double build_seconds = 0.0;
};

// A boundary operator as a function of the Laplace parameter, in the form the
// time stepping needs: single frequencies for the stage eigenvalues and the
// weighted sum over all contour nodes for the history.
class OperatorFamily {
 public:
  virtual ~OperatorFamily() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual std::shared_ptr<const LinearMap> at(Complex s) const = 0;
  // 2 Re sum_l Op(s_l) V.col(l) E.row(l), rows x stages
  virtual Eigen::MatrixXd convolve(const ConvolutionWeights& w) const = 0;
  virtual FamilyStats stats() const { return {}; }
};

// Uncompressed reference: slices Op(s_l) held in memory when they fit the
// budget, otherwise the history is evaluated from the quadrature terms by
// sampling the frequency sum as a function of the delay tau = r/c.
class DenseFamily final : public OperatorFamily {
 public:
  DenseFamily(const LayerOperator& op, const Contour& contour, double memory_budget_bytes = 2.0e9);
  Index rows() const override { return op_.rows(); }
  Index cols() const override { return op_.cols(); }
  std::shared_ptr<const LinearMap> at(Complex s) const override;
  Eigen::MatrixXd convolve(const ConvolutionWeights& w) const override;
  FamilyStats stats() const override;
  bool stored() const { return !slices_.empty(); }
  const Eigen::MatrixXcd& slice(Index l) const { return slices_[static_cast<size_t>(l)]; }

 private:
  Eigen::MatrixXd convolve_streaming(const ConvolutionWeights& w) const;

  const LayerOperator& op_;
  const Contour& contour_;
  std::vector<Eigen::MatrixXcd> slices_;
  double build_seconds_ = 0.0;
  double tau_max_ = 0.0;  // largest delay between a row and the surface
};

struct CompressionOptions {
  double eps_aca = 1e-4;  // face accuracy, also the solver tolerance
  double eps = 1e-2;      // frequency (3D-ACA) accuracy
  Index b_min = 20;
  double eta = 0.8;
  Index r_max = -1;  // per-block rank cap, < 0 for none
};

// Cluster trees for the rows and columns of a layer operator; columns are
// clustered by dof position with the support boxes of their basis functions.
std::shared_ptr<ClusterTree> row_cluster_tree(const LayerOperator& op, Index b_min);
std::shared_ptr<ClusterTree> col_cluster_tree(const LayerOperator& op, Index b_min);

// 3D-ACA per block of the block cluster tree with H-matrix faces.
class AcaFamily final : public OperatorFamily {
 public:
  AcaFamily(const LayerOperator& op, const Contour& contour, CompressionOptions opts);
  Index rows() const override { return op_.rows(); }
  Index cols() const override { return op_.cols(); }
  std::shared_ptr<const LinearMap> at(Complex s) const override;
  Eigen::MatrixXd convolve(const ConvolutionWeights& w) const override;
  FamilyStats stats() const override;

  const ClusterTree& row_tree() const { return *rows_; }
  const ClusterTree& col_tree() const { return *cols_; }
  const BlockTree& block_tree() const { return *blocks_; }
  const CrossApproximation& tensor(Index block) const { return tensors_[static_cast<size_t>(block)]; }

 private:
  const LayerOperator& op_;
  const Contour& contour_;
  CompressionOptions opts_;
  std::shared_ptr<ClusterTree> rows_;
  std::shared_ptr<ClusterTree> cols_;
  std::shared_ptr<BlockTree> blocks_;
  std::vector<CrossApproximation> tensors_;
  std::vector<std::pair<Index, std::vector<size_t>>> col_groups_;  // column cluster, its blocks
  double build_seconds_ = 0.0;
};

FamilyStats tensor_stats(const std::string& name, const std::vector<CrossApproximation>& tensors,
                         const std::vector<char>& admissible, Index representatives, double dense_bytes);

}  // namespace tdbem
