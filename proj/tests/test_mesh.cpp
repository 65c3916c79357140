#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "tdbem/mesh.hpp"

using namespace tdbem;

TEST_CASE("cube mesh counts per level") {
  const Index expect[3][2] = {{50, 96}, {194, 384}, {770, 1536}};
  for (int level = 1; level <= 3; ++level) {
    const auto m = unit_cube(level);
    CHECK(m.num_vertices() == expect[level - 1][0]);
    CHECK(m.num_triangles() == expect[level - 1][1]);
    // Euler characteristic of a sphere
    CHECK(m.num_vertices() - 3 * m.num_triangles() / 2 + m.num_triangles() == 2);
    CHECK(m.h() == doctest::Approx(0.5 / std::pow(2.0, level - 1)));
  }
}

TEST_CASE("cube mesh is closed, outward and covers area 6") {
  for (int level = 1; level <= 3; ++level) {
    const auto m = unit_cube(level);
    CHECK(m.closed());
    CHECK(m.volume() == doctest::Approx(1.0).epsilon(1e-13));
    double area = 0.0;
    for (Index t = 0; t < m.num_triangles(); ++t) {
      area += m.area(t);
      // outward: normal points away from the cube center
      CHECK(m.normal(t).dot(m.centroid(t)) > 0.0);
    }
    CHECK(area == doctest::Approx(6.0).epsilon(1e-13));
  }
}

TEST_CASE("OFF round trip") {
  const auto m = unit_cube(2);
  const std::string path = "test_mesh_roundtrip.off";
  write_off(m, path);
  OffLoadReport rep;
  const auto r = read_off(path, &rep);
  std::remove(path.c_str());
  CHECK(rep.flipped == 0);
  CHECK_FALSE(rep.inverted);
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_triangles() == m.num_triangles());
  for (Index v = 0; v < m.num_vertices(); ++v) CHECK((r.vertex(v) - m.vertex(v)).norm() == 0.0);
  for (Index t = 0; t < m.num_triangles(); ++t) CHECK(r.triangle(t) == m.triangle(t));
}

TEST_CASE("OFF parser errors carry line numbers") {
  const std::string quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
  try {
    parse_off(quad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  CHECK_THROWS_AS(parse_off("PLY\n"), ParseError);
  CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"), ParseError);
}

TEST_CASE("OFF loader repairs orientation") {
  const auto m = unit_cube(1);
  std::string text = "OFF\n# comment line\n" + std::to_string(m.num_vertices()) + " " +
                     std::to_string(m.num_triangles()) + " 0\n";
  for (const auto& p : m.vertices()) {
    text += std::to_string(p.x()) + " " + std::to_string(p.y()) + " " + std::to_string(p.z()) + "\n";
  }
  for (Index t = 0; t < m.num_triangles(); ++t) {
    auto tri = m.triangle(t);
    // flip every triangle (inverted) and additionally every fifth one back
    std::swap(tri[1], tri[2]);
    if (t % 5 == 0) std::swap(tri[1], tri[2]);
    text += "3 " + std::to_string(tri[0]) + " " + std::to_string(tri[1]) + " " + std::to_string(tri[2]) + "\n";
  }
  OffLoadReport rep;
  const auto r = parse_off(text, &rep);
  CHECK(rep.flipped > 0);
  CHECK(r.volume() == doctest::Approx(1.0));
  for (Index t = 0; t < r.num_triangles(); ++t) {
    CHECK(r.normal(t).dot(r.centroid(t)) > 0.0);
  }
}

TEST_CASE("open surface is reported as not closed") {
  const auto m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK_FALSE(m.closed());
  CHECK(m.area(0) == doctest::Approx(0.5));
}

TEST_CASE("boundary partition marks interface vertices Neumann") {
  const auto m = unit_cube(1);
  const auto bp = boundary_partition(m, [&](Index t) {
    const Vec3& n = m.normal(t);
    return n.sum() > 0.0 ? Part::dirichlet : Part::neumann;
  });
  CHECK(bp.p0.select(Part::dirichlet).size() == 48);
  CHECK(bp.p0.select(Part::neumann).size() == 48);
  for (Index v = 0; v < m.num_vertices(); ++v) {
    bool touches_n = false;
    for (Index t : m.vertex_triangles(v)) touches_n |= bp.p0.part[static_cast<size_t>(t)] == Part::neumann;
    CHECK((bp.p1.part[static_cast<size_t>(v)] == Part::neumann) == touches_n);
  }
  // 5 interior vertices per positive face, 3 edge midpoints between them, corner (0.5,0.5,0.5)
  CHECK(bp.p1.select(Part::dirichlet).size() == 19);
}
