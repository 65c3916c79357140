#include "tdbem/bbfmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

namespace tdbem {

namespace {

constexpr double kInv4Pi = 0.07957747154594767;

int coord_max_abs(const Int3& a) { return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}); }

// tensor product weights of a point given in reference coordinates
void tensor_weights(const ChebBasis& basis, const Vec3& xi, Eigen::VectorXd& w, Eigen::Matrix<double, Eigen::Dynamic, 3>* grad) {
  const int p = basis.p;
  std::array<std::vector<double>, 3> w1, d1;
  for (int d = 0; d < 3; ++d) {
    w1[static_cast<size_t>(d)].resize(static_cast<size_t>(p));
    d1[static_cast<size_t>(d)].resize(static_cast<size_t>(p));
    basis.weights(xi(d), w1[static_cast<size_t>(d)].data(), grad ? d1[static_cast<size_t>(d)].data() : nullptr);
  }
  const Index P = static_cast<Index>(p) * p * p;
  w.resize(P);
  if (grad) grad->resize(P, 3);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      for (int c = 0; c < p; ++c) {
        const Index n = (static_cast<Index>(a) * p + b) * p + c;
        const double wa = w1[0][static_cast<size_t>(a)], wb = w1[1][static_cast<size_t>(b)], wc = w1[2][static_cast<size_t>(c)];
        w(n) = wa * wb * wc;
        if (grad) {
          (*grad)(n, 0) = d1[0][static_cast<size_t>(a)] * wb * wc;
          (*grad)(n, 1) = wa * d1[1][static_cast<size_t>(b)] * wc;
          (*grad)(n, 2) = wa * wb * d1[2][static_cast<size_t>(c)];
        }
      }
    }
  }
}

Vec3 node_position(const ChebBasis& basis, Index n) {
  const int p = basis.p;
  const Index a = n / (static_cast<Index>(p) * p);
  const Index b = (n / p) % p;
  const Index c = n % p;
  return {basis.nodes[static_cast<size_t>(a)], basis.nodes[static_cast<size_t>(b)], basis.nodes[static_cast<size_t>(c)]};
}

Complex helmholtz(const Vec3& x, const Vec3& y, Complex s, double c) {
  const double r = (x - y).norm();
  return exp_kernel(s, r / c, 0.0) * (kInv4Pi / r);
}

}  // namespace

ChebBasis::ChebBasis(int order) : p(order) {
  if (order < 1) throw DomainError("Chebyshev order must be at least 1");
  for (int k = 0; k < p; ++k) nodes.push_back(std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * p)));
}

void ChebBasis::weights(double x, double* w, double* dw) const {
  std::vector<double> T(static_cast<size_t>(p)), dT(static_cast<size_t>(p));
  T[0] = 1.0;
  dT[0] = 0.0;
  if (p > 1) {
    T[1] = x;
    dT[1] = 1.0;
  }
  for (int k = 2; k < p; ++k) {
    T[static_cast<size_t>(k)] = 2.0 * x * T[static_cast<size_t>(k - 1)] - T[static_cast<size_t>(k - 2)];
    dT[static_cast<size_t>(k)] =
        2.0 * T[static_cast<size_t>(k - 1)] + 2.0 * x * dT[static_cast<size_t>(k - 1)] - dT[static_cast<size_t>(k - 2)];
  }
  for (int m = 0; m < p; ++m) {
    const double theta = (2.0 * m + 1.0) * std::numbers::pi / (2.0 * p);
    double v = 1.0 / p, dv = 0.0;
    for (int k = 1; k < p; ++k) {
      const double tk = std::cos(k * theta);
      v += 2.0 / p * T[static_cast<size_t>(k)] * tk;
      dv += 2.0 / p * dT[static_cast<size_t>(k)] * tk;
    }
    w[m] = v;
    if (dw) dw[m] = dv;
  }
}

FmmGeometry::FmmGeometry(const TriangleMesh& mesh, const std::vector<Vec3>& targets, int levels, int order)
    : mesh_(&mesh), levels_(levels), basis_(order) {
  if (levels < 1 || levels > 6) throw DomainError("FMM levels must be in 1..6");
  Box bb;
  for (const auto& x : targets) bb.extend(x);
  for (const auto& v : mesh.vertices()) bb.extend(v);
  center_ = 0.5 * (bb.lo + bb.hi);
  half_ = 0.5 * (bb.hi - bb.lo).maxCoeff() * (1.0 + 1e-9) + 1e-12;
  const Index nb = boxes(levels);
  targets_in_.resize(static_cast<size_t>(nb));
  for (size_t i = 0; i < targets.size(); ++i) {
    targets_in_[static_cast<size_t>(finest_box(targets[i]))].push_back(static_cast<Index>(i));
  }
  points_of_.resize(static_cast<size_t>(mesh.num_triangles()));
  std::vector<std::vector<Index>> points_in(static_cast<size_t>(nb));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Vec3& a = mesh.vertex(tri[0]);
    const Vec3& b = mesh.vertex(tri[1]);
    const Vec3& c = mesh.vertex(tri[2]);
    for (const auto& q : regular_points(select_order(width(levels), mesh.diameter(t)), mesh.area(t))) {
      SourcePoint sp;
      sp.y = a + q.xi * (b - a) + q.eta * (c - a);
      sp.w = q.w;
      sp.triangle = t;
      sp.phi = {1.0 - q.xi - q.eta, q.xi, q.eta};
      sp.box = finest_box(sp.y);
      const auto id = static_cast<Index>(points_.size());
      points_of_[static_cast<size_t>(t)].push_back(id);
      points_in[static_cast<size_t>(sp.box)].push_back(id);
      points_.push_back(sp);
    }
  }
  src_occ_.resize(static_cast<size_t>(levels + 1));
  tgt_occ_.resize(static_cast<size_t>(levels + 1));
  for (int d = 0; d <= levels; ++d) {
    src_occ_[static_cast<size_t>(d)].assign(static_cast<size_t>(boxes(d)), 0);
    tgt_occ_[static_cast<size_t>(d)].assign(static_cast<size_t>(boxes(d)), 0);
  }
  for (Index b = 0; b < nb; ++b) {
    const Int3 c = box_coords(levels, b);
    for (int d = 0; d <= levels; ++d) {
      const int sh = levels - d;
      const Index pb = box_index(d, {c[0] >> sh, c[1] >> sh, c[2] >> sh});
      if (!points_in[static_cast<size_t>(b)].empty()) src_occ_[static_cast<size_t>(d)][static_cast<size_t>(pb)] = 1;
      if (!targets_in_[static_cast<size_t>(b)].empty()) tgt_occ_[static_cast<size_t>(d)][static_cast<size_t>(pb)] = 1;
    }
  }
  // near field at the finest level
  const int nL = 1 << levels;
  for (Index b = 0; b < nb; ++b) {
    if (targets_in_[static_cast<size_t>(b)].empty()) continue;
    const Int3 c = box_coords(levels, b);
    NearList nl;
    nl.box = b;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const Int3 n{c[0] + dx, c[1] + dy, c[2] + dz};
          if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[0] >= nL || n[1] >= nL || n[2] >= nL) continue;
          for (Index id : points_in[static_cast<size_t>(box_index(levels, n))]) {
            nl.triangles.push_back(points_[static_cast<size_t>(id)].triangle);
          }
        }
      }
    }
    std::sort(nl.triangles.begin(), nl.triangles.end());
    nl.triangles.erase(std::unique(nl.triangles.begin(), nl.triangles.end()), nl.triangles.end());
    if (!nl.triangles.empty()) near_.push_back(std::move(nl));
  }
  // interaction lists: children of the parent's neighbours that are not neighbours
  interactions_.resize(static_cast<size_t>(levels + 1));
  offsets_.resize(static_cast<size_t>(levels + 1));
  for (int d = 2; d <= levels; ++d) {
    std::map<Int3, Index> offset_id;
    const int nd = 1 << d;
    for (Index b = 0; b < boxes(d); ++b) {
      if (!has_targets(d, b)) continue;
      const Int3 c = box_coords(d, b);
      const Int3 pc{c[0] >> 1, c[1] >> 1, c[2] >> 1};
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const Int3 pn{pc[0] + dx, pc[1] + dy, pc[2] + dz};
            for (int o = 0; o < 8; ++o) {
              const Int3 s{2 * pn[0] + ((o >> 2) & 1), 2 * pn[1] + ((o >> 1) & 1), 2 * pn[2] + (o & 1)};
              if (s[0] < 0 || s[1] < 0 || s[2] < 0 || s[0] >= nd || s[1] >= nd || s[2] >= nd) continue;
              const Int3 off{s[0] - c[0], s[1] - c[1], s[2] - c[2]};
              if (coord_max_abs(off) <= 1) continue;
              const Index sb = box_index(d, s);
              if (!has_sources(d, sb)) continue;
              auto [it, fresh] = offset_id.try_emplace(off, static_cast<Index>(offsets_[static_cast<size_t>(d)].size()));
              if (fresh) offsets_[static_cast<size_t>(d)].push_back(off);
              interactions_[static_cast<size_t>(d)].push_back({b, sb, it->second});
            }
          }
        }
      }
    }
  }
  // transfer matrices between depth d and d+1
  const Index P = nodes_per_box();
  m2m_.resize(static_cast<size_t>(levels + 1));
  l2l_.resize(static_cast<size_t>(levels + 1));
  Eigen::VectorXd w;
  for (int d = 0; d < levels; ++d) {
    for (int o = 0; o < 8; ++o) {
      const Vec3 shift(((o >> 2) & 1) ? 0.5 : -0.5, ((o >> 1) & 1) ? 0.5 : -0.5, (o & 1) ? 0.5 : -0.5);
      Eigen::MatrixXd L(P, P);
      for (Index m = 0; m < P; ++m) {
        tensor_weights(basis_, shift + 0.5 * node_position(basis_, m), w, nullptr);
        L.row(m) = w.transpose();
      }
      m2m_[static_cast<size_t>(d)][o] = L.transpose();
      l2l_[static_cast<size_t>(d)][o] = L;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (Index b = 0; b < nb; ++b) {
    for (Index i : targets_in_[static_cast<size_t>(b)]) {
      weights(b, targets[static_cast<size_t>(i)], w, nullptr);
      for (Index n = 0; n < P; ++n) trip.emplace_back(i, b * P + n, w(n));
    }
  }
  l2p_.resize(static_cast<Index>(targets.size()), nb * P);
  l2p_.setFromTriplets(trip.begin(), trip.end());
}

Index FmmGeometry::box_index(int depth, const Int3& c) const {
  const Index n = Index{1} << depth;
  return (static_cast<Index>(c[0]) * n + c[1]) * n + c[2];
}

Int3 FmmGeometry::box_coords(int depth, Index b) const {
  const Index n = Index{1} << depth;
  return {static_cast<int>(b / (n * n)), static_cast<int>((b / n) % n), static_cast<int>(b % n)};
}

Vec3 FmmGeometry::box_center(int depth, Index b) const {
  const Int3 c = box_coords(depth, b);
  const double w = width(depth);
  return center_ - Vec3::Constant(half_) + w * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

Index FmmGeometry::finest_box(const Vec3& x) const {
  const int n = 1 << levels_;
  const double w = width(levels_);
  Int3 c{};
  for (int d = 0; d < 3; ++d) {
    c[static_cast<size_t>(d)] = std::clamp(static_cast<int>(std::floor((x(d) - center_(d) + half_) / w)), 0, n - 1);
  }
  return box_index(levels_, c);
}

bool FmmGeometry::adjacent(Index a, Index b) const {
  const Int3 ca = box_coords(levels_, a), cb = box_coords(levels_, b);
  return coord_max_abs({ca[0] - cb[0], ca[1] - cb[1], ca[2] - cb[2]}) <= 1;
}

Vec3 FmmGeometry::node(int depth, Index b, Index n) const {
  return box_center(depth, b) + 0.5 * width(depth) * node_position(basis_, n);
}

Complex FmmGeometry::m2l_entry(int depth, Index offset, Index n, Index m, Complex s, double c) const {
  const Int3& o = offsets_[static_cast<size_t>(depth)][static_cast<size_t>(offset)];
  const double w = width(depth);
  const Vec3 x = 0.5 * w * node_position(basis_, n);
  const Vec3 y = w * (Vec3(o[0], o[1], o[2]) + 0.5 * node_position(basis_, m));
  return helmholtz(x, y, s, c);
}

Eigen::MatrixXcd FmmGeometry::m2l(int depth, Index offset, Complex s, double c) const {
  const Index P = nodes_per_box();
  Eigen::MatrixXcd K(P, P);
  for (Index n = 0; n < P; ++n) {
    for (Index m = 0; m < P; ++m) K(n, m) = m2l_entry(depth, offset, n, m, s, c);
  }
  return K;
}

void FmmGeometry::weights(Index box, const Vec3& y, Eigen::VectorXd& w,
                          Eigen::Matrix<double, Eigen::Dynamic, 3>* grad) const {
  const double hw = 0.5 * width(levels_);
  tensor_weights(basis_, (y - box_center(levels_, box)) / hw, w, grad);
  if (grad) *grad /= hw;
}

std::shared_ptr<M2LTensor> build_m2l_tensor(const FmmGeometry& geo, const Contour& contour, double c, double eps,
                                            Index r_max) {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = std::make_shared<M2LTensor>();
  out->crosses.resize(static_cast<size_t>(geo.levels() + 1));
  const auto& nodes = contour.nodes;
  for (int d = 2; d <= geo.levels(); ++d) {
    for (Index o = 0; o < static_cast<Index>(geo.offsets(d).size()); ++o) {
      FaceOracle oracle;
      oracle.frequencies = contour.representatives();
      oracle.face = [&](Index k) {
        BlockMatrix f;
        f.D = geo.m2l(d, o, nodes[static_cast<size_t>(k)], c);
        return f;
      };
      oracle.fiber = [&](Index n, Index m) {
        Eigen::VectorXcd f(static_cast<Index>(nodes.size()));
        for (size_t k = 0; k < nodes.size(); ++k) f(static_cast<Index>(k)) = geo.m2l_entry(d, o, n, m, nodes[k], c);
        return f;
      };
      out->crosses[static_cast<size_t>(d)].push_back(three_d_aca(oracle, eps, 0.0, r_max));
    }
  }
  out->build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

// Single-frequency FMM operator.
class FmmMap final : public LinearMap {
 public:
  FmmMap(const FmmFamily& fam, Eigen::SparseMatrix<Complex> near, std::vector<std::vector<Eigen::MatrixXcd>> m2l)
      : fam_(fam), near_(std::move(near)), m2l_(std::move(m2l)) {}
  Index rows() const override { return fam_.rows(); }
  Index cols() const override { return fam_.cols(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const override {
    if (x.size() != cols()) throw DomainError("FMM matvec dimension mismatch");
    Eigen::VectorXcd y = near_ * x;
    y += fam_.far_apply(x, m2l_).col(0);
    return y;
  }

 private:
  const FmmFamily& fam_;
  Eigen::SparseMatrix<Complex> near_;
  std::vector<std::vector<Eigen::MatrixXcd>> m2l_;
};

}  // namespace

FmmFamily::FmmFamily(const LayerOperator& op, const Contour& contour, std::shared_ptr<const FmmGeometry> geo,
                     std::shared_ptr<const M2LTensor> m2l, FmmOptions opts, bool owns_m2l)
    : op_(op), contour_(contour), geo_(std::move(geo)), m2l_(std::move(m2l)), opts_(opts), owns_m2l_(owns_m2l) {
  const auto t0 = std::chrono::steady_clock::now();
  const TriangleMesh& mesh = op.mesh();
  const Index P = geo_->nodes_per_box();
  const bool dlp = op.kind() == LayerKind::double_layer;
  const bool p1 = op.space() == Space::P1;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd w;
  Eigen::Matrix<double, Eigen::Dynamic, 3> grad;
  for (const auto& sp : geo_->points()) {
    geo_->weights(sp.box, sp.y, w, dlp ? &grad : nullptr);
    const Eigen::VectorXd coef = dlp ? Eigen::VectorXd(grad * mesh.normal(sp.triangle)) : w;
    const auto& tri = mesh.triangle(sp.triangle);
    for (int k = 0; k < (p1 ? 3 : 1); ++k) {
      const Index col = p1 ? tri[static_cast<size_t>(k)] : sp.triangle;
      const double f = sp.w * (p1 ? sp.phi[static_cast<size_t>(k)] : 1.0);
      for (Index n = 0; n < P; ++n) trip.emplace_back(sp.box * P + n, col, f * coef(n));
    }
  }
  p2m_.resize(geo_->boxes(geo_->levels()) * P, op.cols());
  p2m_.setFromTriplets(trip.begin(), trip.end());

  for (const auto& nl : geo_->near_lists()) {
    NearBlock nb;
    nb.target_box = nl.box;
    nb.rows = geo_->targets_in(nl.box);
    nb.triangles = nl.triangles;
    for (Index t : nb.triangles) {
      if (p1) {
        for (Index v : mesh.triangle(t)) nb.cols.push_back(v);
      } else {
        nb.cols.push_back(t);
      }
    }
    std::sort(nb.cols.begin(), nb.cols.end());
    nb.cols.erase(std::unique(nb.cols.begin(), nb.cols.end()), nb.cols.end());
    near_.push_back(std::move(nb));
  }
  const auto& nodes = contour.nodes;
  for (const auto& nb : near_) {
    FaceOracle oracle;
    oracle.frequencies = contour.representatives();
    oracle.face = [&](Index k) {
      BlockMatrix f;
      f.D = std::move(near_values(nb, std::span<const Complex>(&nodes[static_cast<size_t>(k)], 1))[0]);
      return f;
    };
    oracle.fiber = [&](Index i, Index j) { return near_fiber(nb, i, j); };
    near_tensors_.push_back(three_d_aca(oracle, opts.eps, 0.0, opts.r_max));
  }
  build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
void FmmFamily::near_terms(const NearBlock& nb, Index ii, Index t, F&& f) const {
  const TriangleMesh& mesh = op_.mesh();
  const bool p1 = op_.space() == Space::P1;
  const bool dlp = op_.kind() == LayerKind::double_layer;
  const auto& tri = mesh.triangle(t);
  std::array<Index, 3> cols{};
  auto local = [&](Index col) {
    return static_cast<Index>(std::lower_bound(nb.cols.begin(), nb.cols.end(), col) - nb.cols.begin());
  };
  for (int c = 0; c < 3; ++c) cols[static_cast<size_t>(c)] = p1 ? local(tri[static_cast<size_t>(c)]) : local(t);
  auto emit = [&](double tau, double a, const std::array<double, 3>& phi) {
    if (p1) {
      for (int c = 0; c < 3; ++c) f(cols[static_cast<size_t>(c)], tau, a * phi[static_cast<size_t>(c)]);
    } else {
      f(cols[0], tau, a);
    }
  };
  const Index row = nb.rows[static_cast<size_t>(ii)];
  op_.for_each_point(row, t, emit);
  // points of t outside the neighbourhood are in the far field
  const Vec3& x = op_.row_set().x[static_cast<size_t>(row)];
  const Vec3& n = mesh.normal(t);
  for (Index id : geo_->points_of(t)) {
    const auto& sp = geo_->points()[static_cast<size_t>(id)];
    if (geo_->adjacent(sp.box, nb.target_box)) continue;
    const Vec3 d = x - sp.y;
    const double r = d.norm();
    const double k = dlp ? d.dot(n) / (r * r * r) : 1.0 / r;
    emit(r / op_.wave_speed(), -sp.w * k * kInv4Pi, sp.phi);
  }
}

std::vector<Eigen::MatrixXcd> FmmFamily::near_values(const NearBlock& nb, std::span<const Complex> s) const {
  const double kappa = op_.kappa();
  const auto ni = static_cast<Index>(nb.rows.size());
  const auto nj = static_cast<Index>(nb.cols.size());
  std::vector<Eigen::MatrixXcd> out(s.size(), Eigen::MatrixXcd::Zero(ni, nj));
  for (Index ii = 0; ii < ni; ++ii) {
    for (Index t : nb.triangles) {
      near_terms(nb, ii, t, [&](Index j, double tau, double a) {
        for (size_t k = 0; k < s.size(); ++k) out[k](ii, j) += a * exp_kernel(s[k], tau, kappa);
      });
    }
  }
  return out;
}

Eigen::VectorXcd FmmFamily::near_fiber(const NearBlock& nb, Index i, Index j) const {
  const TriangleMesh& mesh = op_.mesh();
  const bool p1 = op_.space() == Space::P1;
  const Index col = nb.cols[static_cast<size_t>(j)];
  const auto& nodes = contour_.nodes;
  const double kappa = op_.kappa();
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Index>(nodes.size()));
  for (Index t : nb.triangles) {
    if (p1) {
      const auto& tri = mesh.triangle(t);
      if (tri[0] != col && tri[1] != col && tri[2] != col) continue;
    } else if (t != col) {
      continue;
    }
    near_terms(nb, i, t, [&](Index jj, double tau, double a) {
      if (jj != j) return;
      for (size_t k = 0; k < nodes.size(); ++k) f(static_cast<Index>(k)) += a * exp_kernel(nodes[k], tau, kappa);
    });
  }
  return f;
}

Eigen::MatrixXcd FmmFamily::far_apply(const Eigen::MatrixXcd& X,
                                      const std::vector<std::vector<Eigen::MatrixXcd>>& m2l) const {
  const int L = geo_->levels();
  const Index P = geo_->nodes_per_box();
  const Index nx = X.cols();
  if (L < 2) return Eigen::MatrixXcd::Zero(rows(), nx);
  std::vector<Eigen::MatrixXcd> M(static_cast<size_t>(L + 1)), Loc(static_cast<size_t>(L + 1));
  M[static_cast<size_t>(L)] = p2m_.cast<Complex>() * X;
  for (int d = L - 1; d >= 2; --d) {
    M[static_cast<size_t>(d)] = Eigen::MatrixXcd::Zero(geo_->boxes(d) * P, nx);
    for (Index b = 0; b < geo_->boxes(d + 1); ++b) {
      if (!geo_->has_sources(d + 1, b)) continue;
      const Int3 c = geo_->box_coords(d + 1, b);
      const Index parent = geo_->box_index(d, {c[0] >> 1, c[1] >> 1, c[2] >> 1});
      const int oct = ((c[0] & 1) << 2) | ((c[1] & 1) << 1) | (c[2] & 1);
      M[static_cast<size_t>(d)].middleRows(parent * P, P) +=
          geo_->m2m(d, oct).cast<Complex>() * M[static_cast<size_t>(d + 1)].middleRows(b * P, P);
    }
  }
  for (int d = 2; d <= L; ++d) {
    Loc[static_cast<size_t>(d)] = Eigen::MatrixXcd::Zero(geo_->boxes(d) * P, nx);
    for (const auto& pr : geo_->interactions(d)) {
      Loc[static_cast<size_t>(d)].middleRows(pr.target * P, P) +=
          m2l[static_cast<size_t>(d)][static_cast<size_t>(pr.offset)] * M[static_cast<size_t>(d)].middleRows(pr.source * P, P);
    }
  }
  for (int d = 2; d < L; ++d) {
    for (Index b = 0; b < geo_->boxes(d + 1); ++b) {
      if (!geo_->has_targets(d + 1, b)) continue;
      const Int3 c = geo_->box_coords(d + 1, b);
      const Index parent = geo_->box_index(d, {c[0] >> 1, c[1] >> 1, c[2] >> 1});
      const int oct = ((c[0] & 1) << 2) | ((c[1] & 1) << 1) | (c[2] & 1);
      Loc[static_cast<size_t>(d + 1)].middleRows(b * P, P) +=
          geo_->l2l(d, oct).cast<Complex>() * Loc[static_cast<size_t>(d)].middleRows(parent * P, P);
    }
  }
  return geo_->l2p().cast<Complex>() * Loc[static_cast<size_t>(L)];
}

std::shared_ptr<const LinearMap> FmmFamily::at(Complex s) const {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (const auto& nb : near_) {
    const Eigen::MatrixXcd B = std::move(near_values(nb, std::span<const Complex>(&s, 1))[0]);
    for (Index i = 0; i < B.rows(); ++i) {
      for (Index j = 0; j < B.cols(); ++j) {
        trip.emplace_back(nb.rows[static_cast<size_t>(i)], nb.cols[static_cast<size_t>(j)], B(i, j));
      }
    }
  }
  Eigen::SparseMatrix<Complex> near(rows(), cols());
  near.setFromTriplets(trip.begin(), trip.end());
  std::vector<std::vector<Eigen::MatrixXcd>> m2l(static_cast<size_t>(geo_->levels() + 1));
  for (int d = 2; d <= geo_->levels(); ++d) {
    for (Index o = 0; o < static_cast<Index>(geo_->offsets(d).size()); ++o) {
      m2l[static_cast<size_t>(d)].push_back(geo_->m2l(d, o, s, op_.wave_speed()));
    }
  }
  return std::make_shared<FmmMap>(*this, std::move(near), std::move(m2l));
}

Eigen::MatrixXd FmmFamily::convolve(const ConvolutionWeights& w) const {
  if (w.V.rows() != cols() || w.V.cols() != contour_.representatives()) {
    throw DomainError("convolution weights do not match the operator");
  }
  const Index m = w.E.cols();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), m);
  for (size_t b = 0; b < near_.size(); ++b) {
    const auto& crosses = near_tensors_[b].crosses;
    if (crosses.empty()) continue;
    const auto& nb = near_[b];
    Eigen::MatrixXcd Vj(static_cast<Index>(nb.cols.size()), w.V.cols());
    for (size_t j = 0; j < nb.cols.size(); ++j) Vj.row(static_cast<Index>(j)) = w.V.row(nb.cols[j]);
    const Eigen::MatrixXcd Y = separated_convolution(crosses, Vj, w.E);
    for (size_t i = 0; i < nb.rows.size(); ++i) acc.row(nb.rows[i]) += Y.row(static_cast<Index>(i));
  }

  const int L = geo_->levels();
  if (L >= 2) {
    const Index P = geo_->nodes_per_box();
    const Index nr = w.V.cols();
    // multipoles of every contour node, then the separated M2L sum
    std::vector<Eigen::MatrixXcd> M(static_cast<size_t>(L + 1)), Loc(static_cast<size_t>(L + 1));
    M[static_cast<size_t>(L)] = p2m_.cast<Complex>() * w.V;
    for (int d = L - 1; d >= 2; --d) {
      M[static_cast<size_t>(d)] = Eigen::MatrixXcd::Zero(geo_->boxes(d) * P, nr);
      for (Index b = 0; b < geo_->boxes(d + 1); ++b) {
        if (!geo_->has_sources(d + 1, b)) continue;
        const Int3 c = geo_->box_coords(d + 1, b);
        const Index parent = geo_->box_index(d, {c[0] >> 1, c[1] >> 1, c[2] >> 1});
        const int oct = ((c[0] & 1) << 2) | ((c[1] & 1) << 1) | (c[2] & 1);
        M[static_cast<size_t>(d)].middleRows(parent * P, P) +=
            geo_->m2m(d, oct).cast<Complex>() * M[static_cast<size_t>(d + 1)].middleRows(b * P, P);
      }
    }
    for (int d = 2; d <= L; ++d) {
      Loc[static_cast<size_t>(d)] = Eigen::MatrixXcd::Zero(geo_->boxes(d) * P, m);
      const auto& tensors = m2l_->crosses[static_cast<size_t>(d)];
      std::vector<std::vector<Eigen::MatrixXcd>> fw(tensors.size());
      for (size_t o = 0; o < tensors.size(); ++o) {
        for (const auto& c : tensors[o].crosses) fw[o].push_back(c.fiber.asDiagonal() * w.E);
      }
      for (const auto& pr : geo_->interactions(d)) {
        const auto& crosses = tensors[static_cast<size_t>(pr.offset)].crosses;
        const auto src = M[static_cast<size_t>(d)].middleRows(pr.source * P, P);
        auto dst = Loc[static_cast<size_t>(d)].middleRows(pr.target * P, P);
        for (size_t c = 0; c < crosses.size(); ++c) {
          dst.noalias() += crosses[c].face.D * (src * fw[static_cast<size_t>(pr.offset)][c]);
        }
      }
    }
    for (int d = 2; d < L; ++d) {
      for (Index b = 0; b < geo_->boxes(d + 1); ++b) {
        if (!geo_->has_targets(d + 1, b)) continue;
        const Int3 c = geo_->box_coords(d + 1, b);
        const Index parent = geo_->box_index(d, {c[0] >> 1, c[1] >> 1, c[2] >> 1});
        const int oct = ((c[0] & 1) << 2) | ((c[1] & 1) << 1) | (c[2] & 1);
        Loc[static_cast<size_t>(d + 1)].middleRows(b * P, P) +=
            geo_->l2l(d, oct).cast<Complex>() * Loc[static_cast<size_t>(d)].middleRows(parent * P, P);
      }
    }
    acc += geo_->l2p().cast<Complex>() * Loc[static_cast<size_t>(L)];
  }
  return 2.0 * acc.real();
}

FamilyStats FmmFamily::stats() const {
  std::vector<CrossApproximation> all = near_tensors_;
  std::vector<char> adm(near_tensors_.size(), 0);
  double m2l_bytes = 0.0;
  for (const auto& per_depth : m2l_->crosses) {
    for (const auto& t : per_depth) {
      all.push_back(t);
      adm.push_back(1);
      m2l_bytes += t.bytes();
    }
  }
  FamilyStats st = tensor_stats("fmm", all, adm, contour_.representatives(),
                                16.0 * static_cast<double>(rows()) * static_cast<double>(cols()) *
                                    static_cast<double>(contour_.representatives()));
  for (size_t b = 0; b < near_.size(); ++b) {
    st.blocks[b].rows = static_cast<Index>(near_[b].rows.size());
    st.blocks[b].cols = static_cast<Index>(near_[b].cols.size());
  }
  // frequency-independent interpolation data: values plus indices
  st.compressed_bytes += 12.0 * static_cast<double>(p2m_.nonZeros() + geo_->l2p().nonZeros());
  if (!owns_m2l_) st.shared_bytes = m2l_bytes;
  st.build_seconds = build_seconds_ + (owns_m2l_ ? m2l_->build_seconds : 0.0);
  return st;
}

}  // namespace tdbem
