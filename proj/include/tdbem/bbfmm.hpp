#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "tdbem/family.hpp"

namespace tdbem {

// Chebyshev interpolation of order p on [-1, 1], nodes of the first kind:
// S_p(x, x_m) = 1/p + 2/p sum_{k=1}^{p-1} T_k(x) T_k(x_m)
struct ChebBasis {
  int p = 1;
  std::vector<double> nodes;

  explicit ChebBasis(int order);
  // S_p(x, x_m) for all m; derivative in x when dw != nullptr
  void weights(double x, double* w, double* dw = nullptr) const;
};

using Int3 = std::array<int, 3>;

// Regular quadrature point of a triangle, the unit of the far field.
struct SourcePoint {
  Vec3 y;
  double w = 0.0;
  Index triangle = 0;
  std::array<double, 3> phi{};
  Index box = 0;  // finest box containing y
};

// Uniform octree over a bounding cube; depth 'levels' is the finest level.
// Far-field sources are the regular quadrature points of the triangles, each in
// the finest box that contains it.
class FmmGeometry {
 public:
  FmmGeometry(const TriangleMesh& mesh, const std::vector<Vec3>& targets, int levels, int order);

  struct Pair {
    Index target = 0;
    Index source = 0;
    Index offset = 0;  // index into offsets(depth)
  };

  // targets of one finest box and the triangles with points in its neighbourhood
  struct NearList {
    Index box = 0;
    std::vector<Index> triangles;
  };

  int levels() const { return levels_; }
  int order() const { return basis_.p; }
  Index nodes_per_box() const { return static_cast<Index>(basis_.p) * basis_.p * basis_.p; }
  Index boxes(int depth) const { return Index{1} << (3 * depth); }
  double width(int depth) const { return 2.0 * half_ / static_cast<double>(1 << depth); }
  const ChebBasis& basis() const { return basis_; }
  const TriangleMesh& mesh() const { return *mesh_; }

  Index box_index(int depth, const Int3& c) const;
  Int3 box_coords(int depth, Index b) const;
  Vec3 box_center(int depth, Index b) const;
  Index finest_box(const Vec3& x) const;
  // finest boxes a and b touch or coincide
  bool adjacent(Index a, Index b) const;

  const std::vector<Index>& targets_in(Index box) const { return targets_in_[static_cast<size_t>(box)]; }
  const std::vector<SourcePoint>& points() const { return points_; }
  const std::vector<Index>& points_of(Index triangle) const { return points_of_[static_cast<size_t>(triangle)]; }
  const std::vector<NearList>& near_lists() const { return near_; }
  const std::vector<Pair>& interactions(int depth) const { return interactions_[static_cast<size_t>(depth)]; }
  const std::vector<Int3>& offsets(int depth) const { return offsets_[static_cast<size_t>(depth)]; }
  bool has_sources(int depth, Index b) const { return src_occ_[static_cast<size_t>(depth)][static_cast<size_t>(b)]; }
  bool has_targets(int depth, Index b) const { return tgt_occ_[static_cast<size_t>(depth)][static_cast<size_t>(b)]; }

  Vec3 node(int depth, Index b, Index n) const;
  // source box centre offset relative to target box centre is width * offset
  Eigen::MatrixXcd m2l(int depth, Index offset, Complex s, double c) const;
  Complex m2l_entry(int depth, Index offset, Index n, Index m, Complex s, double c) const;

  // child (depth+1) nodes -> parent nodes, per octant: parent x child
  const Eigen::MatrixXd& m2m(int depth, int octant) const { return m2m_[static_cast<size_t>(depth)][octant]; }
  // parent nodes -> child nodes, per octant: child x parent
  const Eigen::MatrixXd& l2l(int depth, int octant) const { return l2l_[static_cast<size_t>(depth)][octant]; }
  // rows x (finest boxes * nodes)
  const Eigen::SparseMatrix<double>& l2p() const { return l2p_; }

  // S_p weights of a point in a finest box (and gradient)
  void weights(Index box, const Vec3& y, Eigen::VectorXd& w, Eigen::Matrix<double, Eigen::Dynamic, 3>* grad) const;

 private:
  const TriangleMesh* mesh_;
  int levels_;
  ChebBasis basis_;
  Vec3 center_;
  double half_ = 0.0;
  std::vector<std::vector<Index>> targets_in_;
  std::vector<SourcePoint> points_;
  std::vector<std::vector<Index>> points_of_;
  std::vector<NearList> near_;
  std::vector<std::vector<Pair>> interactions_;
  std::vector<std::vector<Int3>> offsets_;
  std::vector<std::vector<char>> src_occ_;
  std::vector<std::vector<char>> tgt_occ_;
  std::vector<std::array<Eigen::MatrixXd, 8>> m2m_;
  std::vector<std::array<Eigen::MatrixXd, 8>> l2l_;
  Eigen::SparseMatrix<double> l2p_;
};

// Near field of one finest box: exact integrals over the triangles of its
// neighbourhood minus their points that the far field already covers.
struct NearBlock {
  Index target_box = 0;
  std::vector<Index> rows;
  std::vector<Index> triangles;
  std::vector<Index> cols;
};

struct FmmOptions {
  int levels = 2;
  int order = 4;
  double eps_aca = 1e-4;  // unused by the FMM faces, kept for the solver tolerance
  double eps = 1e-2;      // 3D-ACA tolerance over the frequencies
  Index r_max = -1;
};

// M2L operators of every (depth, offset) compressed over the contour.
struct M2LTensor {
  std::vector<std::vector<CrossApproximation>> crosses;  // [depth][offset]
  double build_seconds = 0.0;
};

std::shared_ptr<M2LTensor> build_m2l_tensor(const FmmGeometry& geo, const Contour& contour, double c, double eps,
                                            Index r_max);

class FmmFamily final : public OperatorFamily {
 public:
  // m2l may be shared between the single and double layer on the same rows
  FmmFamily(const LayerOperator& op, const Contour& contour, std::shared_ptr<const FmmGeometry> geo,
            std::shared_ptr<const M2LTensor> m2l, FmmOptions opts, bool owns_m2l = true);
  Index rows() const override { return op_.rows(); }
  Index cols() const override { return op_.cols(); }
  std::shared_ptr<const LinearMap> at(Complex s) const override;
  Eigen::MatrixXd convolve(const ConvolutionWeights& w) const override;
  FamilyStats stats() const override;

  const FmmGeometry& geometry() const { return *geo_; }
  const std::vector<NearBlock>& near_blocks() const { return near_; }
  // near-field values of one block at several frequencies
  std::vector<Eigen::MatrixXcd> near_values(const NearBlock& nb, std::span<const Complex> s) const;
  // entry (i, j) of a near block at every contour node
  Eigen::VectorXcd near_fiber(const NearBlock& nb, Index i, Index j) const;
  const Eigen::SparseMatrix<double>& p2m() const { return p2m_; }

  // far field of x given per-depth M2L operators, used by the single-frequency map
  Eigen::MatrixXcd far_apply(const Eigen::MatrixXcd& X,
                             const std::vector<std::vector<Eigen::MatrixXcd>>& m2l) const;

 private:
  const LayerOperator& op_;
  const Contour& contour_;
  std::shared_ptr<const FmmGeometry> geo_;
  std::shared_ptr<const M2LTensor> m2l_;
  FmmOptions opts_;
  bool owns_m2l_;
  Eigen::SparseMatrix<double> p2m_;  // (finest boxes * nodes) x cols
  std::vector<NearBlock> near_;
  std::vector<CrossApproximation> near_tensors_;
  double build_seconds_ = 0.0;

  // f(local column, tau, a) for row ii of nb on triangle t
  template <typename F>
  void near_terms(const NearBlock& nb, Index ii, Index t, F&& f) const;
};

}  // namespace tdbem
