#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "tdbem/htree.hpp"
#include "tdbem/mesh.hpp"

using namespace tdbem;

TEST_CASE("few points form a single leaf") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(i, 0.5 * i, 0.0);
  const auto tree = build_cluster_tree(pts, 20);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].leaf());
  CHECK(tree.nodes[0].size() == 10);
}

TEST_CASE("collinear points split at the median") {
  std::vector<Vec3> pts;
  for (int i = 39; i >= 0; --i) pts.emplace_back(0.0, i, 0.0);
  const auto tree = build_cluster_tree(pts, 20);
  REQUIRE(tree.nodes.size() == 3);
  const auto left = tree.indices(tree.nodes[0].children[0]);
  const auto right = tree.indices(tree.nodes[0].children[1]);
  CHECK(left.size() == 20);
  CHECK(right.size() == 20);
  auto span = [&](const std::vector<Index>& idx) {
    std::vector<double> y;
    for (Index i : idx) y.push_back(pts[static_cast<size_t>(i)].y());
    return std::pair(*std::min_element(y.begin(), y.end()), *std::max_element(y.begin(), y.end()));
  };
  const auto [l0, l1] = span(left);
  const auto [r0, r1] = span(right);
  CHECK((l1 < r0 || r1 < l0));
  CHECK(l1 - l0 == 19.0);
  CHECK(r1 - r0 == 19.0);
}

TEST_CASE("cube centroids: balanced leaves and a permutation") {
  const auto mesh = unit_cube(2);
  std::vector<Vec3> pts;
  for (Index t = 0; t < mesh.num_triangles(); ++t) pts.push_back(mesh.centroid(t));
  const auto tree = build_cluster_tree(pts, 20);
  std::vector<Index> perm = tree.perm;
  std::sort(perm.begin(), perm.end());
  std::vector<Index> ref(perm.size());
  std::iota(ref.begin(), ref.end(), Index{0});
  CHECK(perm == ref);
  for (const auto& n : tree.nodes) {
    if (n.leaf()) {
      CHECK(n.size() <= 20);
      continue;
    }
    const auto& a = tree.nodes[static_cast<size_t>(n.children[0])];
    const auto& b = tree.nodes[static_cast<size_t>(n.children[1])];
    CHECK(std::abs(a.size() - b.size()) <= 1);
    CHECK(a.size() + b.size() == n.size());
  }
}

TEST_CASE("block tree leaves partition the index product") {
  const auto mesh = unit_cube(2);
  std::vector<Vec3> pts;
  for (Index t = 0; t < mesh.num_triangles(); ++t) pts.push_back(mesh.centroid(t));
  const auto rows = build_cluster_tree(pts, 20);
  const auto cols = build_cluster_tree(std::vector<Vec3>(mesh.vertices()), 20);
  const auto bt = build_block_tree(rows, cols, 0.8);
  const Index m = mesh.num_triangles(), n = mesh.num_vertices();
  std::vector<int> hit(static_cast<size_t>(m * n), 0);
  bool any_admissible = false;
  for (const auto& b : bt.blocks) {
    const auto& rn = rows.nodes[static_cast<size_t>(b.row)];
    const auto& cn = cols.nodes[static_cast<size_t>(b.col)];
    if (b.admissible) {
      any_admissible = true;
      CHECK(std::min(rn.box.diameter(), cn.box.diameter()) <= 0.8 * rn.box.distance(cn.box));
    }
    for (Index i : rows.indices(b.row)) {
      for (Index j : cols.indices(b.col)) ++hit[static_cast<size_t>(i * n + j)];
    }
  }
  CHECK(any_admissible);
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
}

TEST_CASE("box distance and admissibility of separated clusters") {
  Box a, b;
  a.extend(Vec3(0, 0, 0));
  a.extend(Vec3(1, 1, 1));
  b.extend(Vec3(3, 0, 0));
  b.extend(Vec3(4, 1, 1));
  CHECK(a.distance(b) == doctest::Approx(2.0));
  CHECK(a.distance(a) == 0.0);

  std::vector<Vec3> p, q;
  for (int i = 0; i < 5; ++i) {
    p.emplace_back(0.1 * i, 0.0, 0.0);
    q.emplace_back(10.0 + 0.1 * i, 0.0, 0.0);
  }
  const auto bt = build_block_tree(build_cluster_tree(p, 20), build_cluster_tree(q, 20), 0.8);
  REQUIRE(bt.blocks.size() == 1);
  CHECK(bt.blocks[0].admissible);
}
