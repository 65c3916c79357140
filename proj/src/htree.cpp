#include "tdbem/htree.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace tdbem {

double Box::distance(const Box& b) const {
  const Vec3 gap = (b.lo - hi).cwiseMax(lo - b.hi).cwiseMax(0.0);
  return gap.norm();
}

std::vector<Index> ClusterTree::indices(Index node) const {
  const auto& n = nodes[static_cast<size_t>(node)];
  return {perm.begin() + n.begin, perm.begin() + n.end};
}

Index ClusterTree::depth() const {
  Index d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

namespace {

void split(ClusterTree& tree, Index node, const std::vector<Vec3>& points, const std::vector<Box>& supports) {
  auto& n = tree.nodes[static_cast<size_t>(node)];
  for (Index k = n.begin; k < n.end; ++k) {
    const Index i = tree.perm[static_cast<size_t>(k)];
    if (supports.empty()) {
      n.box.extend(points[static_cast<size_t>(i)]);
    } else {
      n.box.extend(supports[static_cast<size_t>(i)]);
    }
  }
  if (n.size() <= tree.b_min) return;

  Vec3 mean = Vec3::Zero();
  for (Index k = n.begin; k < n.end; ++k) mean += points[static_cast<size_t>(tree.perm[static_cast<size_t>(k)])];
  mean /= static_cast<double>(n.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (Index k = n.begin; k < n.end; ++k) {
    const Vec3 d = points[static_cast<size_t>(tree.perm[static_cast<size_t>(k)])] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Vec3 axis = es.eigenvectors().col(2);
  if (axis.norm() == 0.0 || !axis.allFinite()) axis = Vec3::UnitX();
  n.axis = axis;

  const auto first = tree.perm.begin() + n.begin;
  const auto last = tree.perm.begin() + n.end;
  // ties broken by coordinate order, then index
  std::sort(first, last, [&](Index a, Index b) {
    const Vec3& pa = points[static_cast<size_t>(a)];
    const Vec3& pb = points[static_cast<size_t>(b)];
    const double da = pa.dot(axis);
    const double db = pb.dot(axis);
    if (std::abs(da - db) > 1e-12 * (1.0 + std::abs(da))) return da < db;
    for (int c = 0; c < 3; ++c) {
      if (pa(c) != pb(c)) return pa(c) < pb(c);
    }
    return a < b;
  });
  const Index mid = n.begin + n.size() / 2;
  const Index begin = n.begin;
  const Index end = n.end;
  const Index depth = n.depth;
  for (int c = 0; c < 2; ++c) {
    ClusterNode child;
    child.begin = c == 0 ? begin : mid;
    child.end = c == 0 ? mid : end;
    child.depth = depth + 1;
    tree.nodes.push_back(child);
    tree.nodes[static_cast<size_t>(node)].children[c] = static_cast<Index>(tree.nodes.size()) - 1;
  }
  for (int c = 0; c < 2; ++c) split(tree, tree.nodes[static_cast<size_t>(node)].children[c], points, supports);
}

void descend(const ClusterTree& rows, const ClusterTree& cols, Index r, Index c, double eta, BlockTree& bt) {
  const auto& nr = rows.nodes[static_cast<size_t>(r)];
  const auto& nc = cols.nodes[static_cast<size_t>(c)];
  const double dist = nr.box.distance(nc.box);
  if (std::min(nr.box.diameter(), nc.box.diameter()) <= eta * dist) {
    bt.blocks.push_back({r, c, true});
    return;
  }
  if (nr.leaf() && nc.leaf()) {
    bt.blocks.push_back({r, c, false});
    return;
  }
  // split the larger cluster, or both when neither is a leaf
  if (!nr.leaf() && !nc.leaf()) {
    for (Index a : nr.children) {
      for (Index b : nc.children) descend(rows, cols, a, b, eta, bt);
    }
  } else if (!nr.leaf()) {
    for (Index a : nr.children) descend(rows, cols, a, c, eta, bt);
  } else {
    for (Index b : nc.children) descend(rows, cols, r, b, eta, bt);
  }
}

}  // namespace

ClusterTree build_cluster_tree(const std::vector<Vec3>& points, Index b_min, const std::vector<Box>& supports) {
  if (b_min < 1) throw DomainError("b_min must be at least 1");
  if (!supports.empty() && supports.size() != points.size()) throw DomainError("support boxes do not match points");
  ClusterTree tree;
  tree.b_min = b_min;
  tree.perm.resize(points.size());
  std::iota(tree.perm.begin(), tree.perm.end(), Index{0});
  ClusterNode root;
  root.end = static_cast<Index>(points.size());
  tree.nodes.push_back(root);
  split(tree, 0, points, supports);
  return tree;
}

BlockTree build_block_tree(const ClusterTree& rows, const ClusterTree& cols, double eta) {
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  BlockTree bt;
  bt.eta = eta;
  if (rows.perm.empty() || cols.perm.empty()) return bt;
  descend(rows, cols, 0, 0, eta, bt);
  return bt;
}

void write_block_csv(const std::string& path, const ClusterTree& rows, const ClusterTree& cols, const BlockTree& bt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "block,row_begin,row_end,col_begin,col_end,admissible\n";
  for (size_t b = 0; b < bt.blocks.size(); ++b) {
    const auto& r = rows.nodes[static_cast<size_t>(bt.blocks[b].row)];
    const auto& c = cols.nodes[static_cast<size_t>(bt.blocks[b].col)];
    out << b << ',' << r.begin << ',' << r.end << ',' << c.begin << ',' << c.end << ','
        << (bt.blocks[b].admissible ? 1 : 0) << '\n';
  }
}

}  // namespace tdbem
