#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tdbem/types.hpp"

namespace tdbem {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::max());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double diameter() const { return (hi - lo).norm(); }
  double distance(const Box& b) const;
};

struct ClusterNode {
  Index begin = 0;  // range in ClusterTree::perm
  Index end = 0;
  Box box;
  Vec3 axis = Vec3::Zero();
  Index children[2] = {-1, -1};
  Index depth = 0;

  bool leaf() const { return children[0] < 0; }
  Index size() const { return end - begin; }
};

// Binary tree from recursive median splits along the dominant principal axis.
struct ClusterTree {
  std::vector<ClusterNode> nodes;  // nodes[0] is the root
  std::vector<Index> perm;         // dof indices ordered by cluster
  Index b_min = 20;

  std::vector<Index> indices(Index node) const;
  Index depth() const;
};

// Points are dof positions; boxes (optional) are the dof supports used for the
// cluster bounding boxes.
ClusterTree build_cluster_tree(const std::vector<Vec3>& points, Index b_min, const std::vector<Box>& supports = {});

struct BlockNode {
  Index row = 0;  // cluster node in the row tree
  Index col = 0;  // cluster node in the column tree
  bool admissible = false;
};

// Leaves of the block cluster tree; admissible if min(diam) <= eta dist.
struct BlockTree {
  std::vector<BlockNode> blocks;
  double eta = 0.8;
};

BlockTree build_block_tree(const ClusterTree& rows, const ClusterTree& cols, double eta);

// block id, row range, col range, admissible flag
void write_block_csv(const std::string& path, const ClusterTree& rows, const ClusterTree& cols, const BlockTree& bt);

}  // namespace tdbem
