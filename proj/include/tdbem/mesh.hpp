#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tdbem/types.hpp"

namespace tdbem {

using Triangle = std::array<Index, 3>;

class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Vec3& vertex(Index v) const { return vertices_[static_cast<size_t>(v)]; }
  const Triangle& triangle(Index t) const { return triangles_[static_cast<size_t>(t)]; }

  // unit outward normal (right-hand rule on the vertex order)
  const Vec3& normal(Index t) const { return normals_[static_cast<size_t>(t)]; }
  double area(Index t) const { return areas_[static_cast<size_t>(t)]; }
  const Vec3& centroid(Index t) const { return centroids_[static_cast<size_t>(t)]; }
  // longest edge of triangle t
  double diameter(Index t) const { return diameters_[static_cast<size_t>(t)]; }
  // largest edge length of the mesh
  double h() const { return h_; }
  // triangles incident to vertex v
  const std::vector<Index>& vertex_triangles(Index v) const { return vertex_tris_[static_cast<size_t>(v)]; }
  // every edge shared by exactly two triangles
  bool closed() const { return closed_; }
  // signed enclosed volume, positive for outward orientation of a closed surface
  double volume() const;

 private:
  void compute_geometry();

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::vector<Vec3> centroids_;
  std::vector<double> diameters_;
  std::vector<std::vector<Index>> vertex_tris_;
  double h_ = 0.0;
  bool closed_ = false;
};

// Surface of [-0.5,0.5]^3: level 1 splits every face into 2x2 squares, each cut
// into 4 triangles through its center; each further level refines 1 -> 4.
TriangleMesh unit_cube(int level);

// midpoint refinement of every triangle into four
TriangleMesh refine(const TriangleMesh& mesh);

struct OffLoadReport {
  Index flipped = 0;       // triangles reoriented for consistency
  bool inverted = false;   // whole surface flipped to point outward
};

TriangleMesh read_off(const std::string& path, OffLoadReport* report = nullptr);
TriangleMesh parse_off(const std::string& text, OffLoadReport* report = nullptr);
void write_off(const TriangleMesh& mesh, const std::string& path);

enum class Space { P0, P1 };
enum class Part : std::uint8_t { dirichlet, neumann };

// Degrees of freedom of a trace space with the boundary part of each dof.
struct DofMap {
  Space space = Space::P0;
  std::vector<Part> part;  // indexed by triangle (P0) or vertex (P1)

  Index size() const { return static_cast<Index>(part.size()); }
  std::vector<Index> select(Part p) const;
};

struct BoundaryPartition {
  DofMap p0;  // triangles
  DofMap p1;  // vertices; a vertex touching a Neumann triangle is Neumann
};

BoundaryPartition boundary_partition(const TriangleMesh& mesh, const std::function<Part(Index)>& triangle_part);

}  // namespace tdbem
