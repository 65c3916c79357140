#include "tdbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace tdbem {

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& t : triangles_) {
    for (Index v : t) {
      if (v < 0 || v >= num_vertices()) throw DomainError("triangle references a missing vertex");
    }
  }
  compute_geometry();
}

void TriangleMesh::compute_geometry() {
  const size_t nt = triangles_.size();
  normals_.resize(nt);
  areas_.resize(nt);
  centroids_.resize(nt);
  diameters_.resize(nt);
  vertex_tris_.assign(vertices_.size(), {});
  h_ = 0.0;
  std::map<std::pair<Index, Index>, int> edges;
  for (size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    const Vec3& a = vertices_[static_cast<size_t>(tri[0])];
    const Vec3& b = vertices_[static_cast<size_t>(tri[1])];
    const Vec3& c = vertices_[static_cast<size_t>(tri[2])];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (!(len > 0.0)) throw DomainError("degenerate triangle " + std::to_string(t));
    normals_[t] = n / len;
    areas_[t] = 0.5 * len;
    centroids_[t] = (a + b + c) / 3.0;
    diameters_[t] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    h_ = std::max(h_, diameters_[t]);
    for (int k = 0; k < 3; ++k) {
      vertex_tris_[static_cast<size_t>(tri[static_cast<size_t>(k)])].push_back(static_cast<Index>(t));
      Index p = tri[static_cast<size_t>(k)];
      Index q = tri[static_cast<size_t>((k + 1) % 3)];
      ++edges[{std::min(p, q), std::max(p, q)}];
    }
  }
  closed_ = !edges.empty() && std::all_of(edges.begin(), edges.end(), [](const auto& e) { return e.second == 2; });
}

double TriangleMesh::volume() const {
  double v = 0.0;
  for (const auto& t : triangles_) {
    v += vertex(t[0]).dot(vertex(t[1]).cross(vertex(t[2])));
  }
  return v / 6.0;
}

namespace {

struct CubeFace {
  Vec3 origin;
  Vec3 u;
  Vec3 v;
};

class VertexPool {
 public:
  Index add(const Vec3& p) {
    const auto key = std::make_tuple(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9), std::llround(p.z() * 1e9));
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const Index id = static_cast<Index>(points.size());
    points.push_back(p);
    index_.emplace(key, id);
    return id;
  }
  std::vector<Vec3> points;

 private:
  std::map<std::tuple<long long, long long, long long>, Index> index_;
};

}  // namespace

TriangleMesh unit_cube(int level) {
  if (level < 1 || level > 8) throw DomainError("cube level must be in 1..8");
  const std::array<CubeFace, 6> faces{{
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},
      {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},
  }};
  VertexPool pool;
  std::vector<Triangle> tris;
  for (const auto& f : faces) {
    auto at = [&](double a, double b) { return pool.add(f.origin + a * f.u + b * f.v - Vec3::Constant(0.5)); };
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double a0 = 0.5 * i;
        const double b0 = 0.5 * j;
        const Index p00 = at(a0, b0);
        const Index p10 = at(a0 + 0.5, b0);
        const Index p11 = at(a0 + 0.5, b0 + 0.5);
        const Index p01 = at(a0, b0 + 0.5);
        const Index c = at(a0 + 0.25, b0 + 0.25);
        tris.push_back({p00, p10, c});
        tris.push_back({p10, p11, c});
        tris.push_back({p11, p01, c});
        tris.push_back({p01, p00, c});
      }
    }
  }
  TriangleMesh mesh(std::move(pool.points), std::move(tris));
  for (int l = 1; l < level; ++l) mesh = refine(mesh);
  return mesh;
}

TriangleMesh refine(const TriangleMesh& mesh) {
  std::vector<Vec3> verts = mesh.vertices();
  std::map<std::pair<Index, Index>, Index> mid;
  auto midpoint = [&](Index a, Index b) {
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const Index id = static_cast<Index>(verts.size());
    verts.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    mid.emplace(key, id);
    return id;
  };
  std::vector<Triangle> tris;
  tris.reserve(mesh.triangles().size() * 4);
  for (const auto& t : mesh.triangles()) {
    const Index ab = midpoint(t[0], t[1]);
    const Index bc = midpoint(t[1], t[2]);
    const Index ca = midpoint(t[2], t[0]);
    tris.push_back({t[0], ab, ca});
    tris.push_back({ab, t[1], bc});
    tris.push_back({ca, bc, t[2]});
    tris.push_back({ab, bc, ca});
  }
  return TriangleMesh(std::move(verts), std::move(tris));
}

namespace {

// Consistent orientation by breadth-first propagation over shared edges.
Index orient(std::vector<Triangle>& tris) {
  std::map<std::pair<Index, Index>, std::vector<Index>> edge_tris;
  for (size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Index a = tris[t][static_cast<size_t>(k)];
      const Index b = tris[t][static_cast<size_t>((k + 1) % 3)];
      auto& list = edge_tris[{std::min(a, b), std::max(a, b)}];
      list.push_back(static_cast<Index>(t));
      if (list.size() > 2) throw DomainError("non-manifold edge in mesh");
    }
  }
  auto has_directed = [&](Index t, Index a, Index b) {
    const auto& tri = tris[static_cast<size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      if (tri[static_cast<size_t>(k)] == a && tri[static_cast<size_t>((k + 1) % 3)] == b) return true;
    }
    return false;
  };
  std::vector<int> state(tris.size(), 0);  // 0 unvisited, 1 visited
  Index flipped = 0;
  for (size_t seed = 0; seed < tris.size(); ++seed) {
    if (state[seed]) continue;
    state[seed] = 1;
    std::deque<Index> queue{static_cast<Index>(seed)};
    while (!queue.empty()) {
      const Index t = queue.front();
      queue.pop_front();
      for (int k = 0; k < 3; ++k) {
        const Index a = tris[static_cast<size_t>(t)][static_cast<size_t>(k)];
        const Index b = tris[static_cast<size_t>(t)][static_cast<size_t>((k + 1) % 3)];
        for (Index nb : edge_tris[{std::min(a, b), std::max(a, b)}]) {
          if (nb == t) continue;
          const bool same = has_directed(nb, a, b);
          if (!state[static_cast<size_t>(nb)]) {
            if (same) {
              std::swap(tris[static_cast<size_t>(nb)][1], tris[static_cast<size_t>(nb)][2]);
              ++flipped;
            }
            state[static_cast<size_t>(nb)] = 1;
            queue.push_back(nb);
          } else if (same) {
            throw DomainError("non-orientable surface");
          }
        }
      }
    }
  }
  return flipped;
}

}  // namespace

TriangleMesh parse_off(const std::string& text, OffLoadReport* report) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  // next non-empty, comment-stripped line
  auto next = [&](std::istringstream& fields) {
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  };
  std::istringstream f;
  if (!next(f)) throw ParseError("empty OFF file", 0);
  std::string head;
  f >> head;
  if (head != "OFF") throw ParseError("missing OFF header", lineno);
  long nv = -1;
  long nf = -1;
  long ne = 0;
  if (!(f >> nv)) {
    if (!next(f)) throw ParseError("missing OFF counts", lineno);
    f >> nv;
  }
  if (!(f >> nf) || nv < 0 || nf < 0) throw ParseError("invalid OFF counts", lineno);
  f >> ne;
  std::vector<Vec3> verts(static_cast<size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next(f)) throw ParseError("unexpected end of file in vertex list", lineno);
    Vec3 p;
    if (!(f >> p.x() >> p.y() >> p.z())) throw ParseError("malformed vertex", lineno);
    verts[static_cast<size_t>(i)] = p;
  }
  std::vector<Triangle> tris(static_cast<size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    if (!next(f)) throw ParseError("unexpected end of file in face list", lineno);
    long arity = 0;
    if (!(f >> arity)) throw ParseError("malformed face", lineno);
    if (arity != 3) throw ParseError("face arity " + std::to_string(arity) + ", only triangles supported", lineno);
    Triangle t{};
    for (auto& v : t) {
      if (!(f >> v)) throw ParseError("malformed face", lineno);
      if (v < 0 || v >= nv) throw ParseError("face references vertex " + std::to_string(v), lineno);
    }
    tris[static_cast<size_t>(i)] = t;
  }
  OffLoadReport rep;
  rep.flipped = orient(tris);
  TriangleMesh mesh(verts, tris);
  if (mesh.closed() && mesh.volume() < 0.0) {
    for (auto& t : tris) std::swap(t[1], t[2]);
    mesh = TriangleMesh(std::move(verts), std::move(tris));
    rep.inverted = true;
  }
  if (report) *report = rep;
  return mesh;
}

TriangleMesh read_off(const std::string& path, OffLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_off(buf.str(), report);
}

void write_off(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

std::vector<Index> DofMap::select(Part p) const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (part[static_cast<size_t>(i)] == p) out.push_back(i);
  }
  return out;
}

BoundaryPartition boundary_partition(const TriangleMesh& mesh, const std::function<Part(Index)>& triangle_part) {
  BoundaryPartition bp;
  bp.p0.space = Space::P0;
  bp.p1.space = Space::P1;
  bp.p0.part.resize(static_cast<size_t>(mesh.num_triangles()));
  bp.p1.part.assign(static_cast<size_t>(mesh.num_vertices()), Part::dirichlet);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Part p = triangle_part(t);
    bp.p0.part[static_cast<size_t>(t)] = p;
    if (p == Part::neumann) {
      for (Index v : mesh.triangle(t)) bp.p1.part[static_cast<size_t>(v)] = Part::neumann;
    }
  }
  return bp;
}

}  // namespace tdbem
