#include "tdbem/family.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

namespace tdbem {

namespace {

constexpr int kPanelDegree = 10;

// Piecewise Chebyshev-Lobatto grid on [0, tau_max]
struct DelayGrid {
  double h = 0.0;
  Index panels = 0;
  std::array<double, kPanelDegree + 1> node{};  // on [0, 1]
  std::array<double, kPanelDegree + 1> bw{};    // barycentric weights

  DelayGrid(double tau_max, double s_max) {
    h = 2.0 / std::max(s_max, 1.0);
    panels = std::max<Index>(1, static_cast<Index>(std::ceil(tau_max / h)));
    h = tau_max / static_cast<double>(panels);
    for (int k = 0; k <= kPanelDegree; ++k) {
      node[static_cast<size_t>(k)] = 0.5 * (1.0 - std::cos(std::numbers::pi * k / kPanelDegree));
      bw[static_cast<size_t>(k)] = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == kPanelDegree) ? 0.5 : 1.0);
    }
  }
  Index samples() const { return panels * (kPanelDegree + 1); }
  double tau(Index sample) const {
    const Index p = sample / (kPanelDegree + 1);
    return h * (static_cast<double>(p) + node[static_cast<size_t>(sample % (kPanelDegree + 1))]);
  }
  // panel index and Lagrange values at tau
  Index locate(double tau, std::array<double, kPanelDegree + 1>& L) const {
    Index p = static_cast<Index>(tau / h);
    p = std::clamp<Index>(p, 0, panels - 1);
    const double x = tau / h - static_cast<double>(p);
    double sum = 0.0;
    for (int k = 0; k <= kPanelDegree; ++k) {
      const double d = x - node[static_cast<size_t>(k)];
      if (d == 0.0) {
        L.fill(0.0);
        L[static_cast<size_t>(k)] = 1.0;
        return p;
      }
      L[static_cast<size_t>(k)] = bw[static_cast<size_t>(k)] / d;
      sum += L[static_cast<size_t>(k)];
    }
    for (auto& v : L) v /= sum;
    return p;
  }
};

}  // namespace

DenseFamily::DenseFamily(const LayerOperator& op, const Contour& contour, double memory_budget_bytes)
    : op_(op), contour_(contour) {
  const auto t0 = std::chrono::steady_clock::now();
  const double bytes = 16.0 * static_cast<double>(op.rows()) * static_cast<double>(op.cols()) *
                       static_cast<double>(contour.representatives());
  if (bytes <= memory_budget_bytes) {
    std::vector<Index> I(static_cast<size_t>(op.rows()));
    std::vector<Index> J(static_cast<size_t>(op.cols()));
    for (size_t i = 0; i < I.size(); ++i) I[i] = static_cast<Index>(i);
    for (size_t j = 0; j < J.size(); ++j) J[j] = static_cast<Index>(j);
    slices_ = op.blocks(I, J, contour.nodes);
  } else {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
    Vec3 hi = -lo;
    for (const auto& x : op.row_set().x) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    for (Index v = 0; v < op.mesh().num_vertices(); ++v) {
      lo = lo.cwiseMin(op.mesh().vertex(v));
      hi = hi.cwiseMax(op.mesh().vertex(v));
    }
    tau_max_ = 1.0001 * (hi - lo).norm() / op.wave_speed();
  }
  build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const LinearMap> DenseFamily::at(Complex s) const {
  return std::make_shared<DenseMap>(op_.dense(s));
}

Eigen::MatrixXd DenseFamily::convolve(const ConvolutionWeights& w) const {
  if (w.V.rows() != cols() || w.V.cols() != contour_.representatives()) {
    throw DomainError("convolution weights do not match the operator");
  }
  if (!stored()) return convolve_streaming(w);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), w.E.cols());
  for (Index l = 0; l < contour_.representatives(); ++l) {
    const Eigen::VectorXcd y = slices_[static_cast<size_t>(l)] * w.V.col(l);
    acc.noalias() += y * w.E.row(l);
  }
  return 2.0 * acc.real();
}

Eigen::MatrixXd DenseFamily::convolve_streaming(const ConvolutionWeights& w) const {
  const Index nr = contour_.representatives();
  const Index m = w.E.cols();
  const Index nc = cols();
  double s_max = 0.0;
  for (const auto& s : contour_.nodes) s_max = std::max(s_max, std::abs(s));
  const DelayGrid grid(tau_max_, s_max);
  const Index ns = grid.samples();
  const bool dlp = op_.kappa() != 0.0;
  const int ncomp = static_cast<int>(m) * (dlp ? 2 : 1);

  // F_{j,a}(tau) = 2 Re sum_l V_jl E_la e^{-s_l tau}, and the s_l-weighted sum for the double layer
  Eigen::MatrixXcd X(nr, ns);
  for (Index l = 0; l < nr; ++l) {
    const Complex s = contour_.nodes[static_cast<size_t>(l)];
    for (Index q = 0; q < ns; ++q) X(l, q) = std::exp(-s * grid.tau(q));
  }
  std::vector<double> table(static_cast<size_t>(nc * ns * ncomp));
  Eigen::VectorXcd svec(nr);
  for (Index l = 0; l < nr; ++l) svec(l) = contour_.nodes[static_cast<size_t>(l)];
  for (int comp = 0; comp < ncomp; ++comp) {
    const Index a = comp % m;
    Eigen::MatrixXcd C = w.V * w.E.col(a).asDiagonal();
    if (comp >= m) C = C * svec.asDiagonal();
    const Eigen::MatrixXd F = 2.0 * (C * X).real();
    for (Index j = 0; j < nc; ++j) {
      for (Index q = 0; q < ns; ++q) table[static_cast<size_t>((j * ns + q) * ncomp + comp)] = F(j, q);
    }
  }

  const TriangleMesh& mesh = op_.mesh();
  const bool p1 = op_.space() == Space::P1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), m);
  std::array<double, kPanelDegree + 1> L{};
  std::vector<double> val(static_cast<size_t>(ncomp));
  for (Index i = 0; i < rows(); ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangle(t);
      op_.for_each_point(i, t, [&](double tau, double a, const std::array<double, 3>& phi) {
        const Index p = grid.locate(tau, L);
        const Index base = p * (kPanelDegree + 1);
        const int ncol = p1 ? 3 : 1;
        for (int c = 0; c < ncol; ++c) {
          const Index j = p1 ? tri[static_cast<size_t>(c)] : t;
          const double wgt = p1 ? a * phi[static_cast<size_t>(c)] : a;
          std::fill(val.begin(), val.end(), 0.0);
          const double* row = &table[static_cast<size_t>((j * ns + base) * ncomp)];
          for (int k = 0; k <= kPanelDegree; ++k) {
            const double lk = L[static_cast<size_t>(k)];
            for (int comp = 0; comp < ncomp; ++comp) val[static_cast<size_t>(comp)] += lk * row[k * ncomp + comp];
          }
          for (Index b = 0; b < m; ++b) {
            double v = val[static_cast<size_t>(b)];
            if (dlp) v += tau * val[static_cast<size_t>(m + b)];
            acc(b) += wgt * v;
          }
        }
      });
    }
    out.row(i) = acc;
  }
  return out;
}

FamilyStats DenseFamily::stats() const {
  FamilyStats st;
  st.name = "dense";
  st.dense_bytes = 16.0 * static_cast<double>(rows()) * static_cast<double>(cols()) *
                   static_cast<double>(contour_.representatives());
  st.compressed_bytes = st.dense_bytes;
  st.build_seconds = build_seconds_;
  return st;
}

std::shared_ptr<ClusterTree> row_cluster_tree(const LayerOperator& op, Index b_min) {
  return std::make_shared<ClusterTree>(build_cluster_tree(op.row_set().x, b_min));
}

std::shared_ptr<ClusterTree> col_cluster_tree(const LayerOperator& op, Index b_min) {
  const TriangleMesh& mesh = op.mesh();
  std::vector<Box> tri_box(static_cast<size_t>(mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (Index v : mesh.triangle(t)) tri_box[static_cast<size_t>(t)].extend(mesh.vertex(v));
  }
  std::vector<Vec3> points;
  std::vector<Box> boxes;
  if (op.space() == Space::P0) {
    for (Index t = 0; t < mesh.num_triangles(); ++t) points.push_back(mesh.centroid(t));
    boxes = tri_box;
  } else {
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      points.push_back(mesh.vertex(v));
      Box b;
      for (Index t : mesh.vertex_triangles(v)) b.extend(tri_box[static_cast<size_t>(t)]);
      boxes.push_back(b);
    }
  }
  return std::make_shared<ClusterTree>(build_cluster_tree(points, b_min, boxes));
}

AcaFamily::AcaFamily(const LayerOperator& op, const Contour& contour, CompressionOptions opts)
    : op_(op), contour_(contour), opts_(opts) {
  const auto t0 = std::chrono::steady_clock::now();
  rows_ = row_cluster_tree(op, opts.b_min);
  cols_ = col_cluster_tree(op, opts.b_min);
  blocks_ = std::make_shared<BlockTree>(build_block_tree(*rows_, *cols_, opts.eta));
  const auto& nodes = contour.nodes;
  for (const auto& b : blocks_->blocks) {
    const std::vector<Index> I = rows_->indices(b.row);
    const std::vector<Index> J = cols_->indices(b.col);
    FaceOracle oracle;
    oracle.frequencies = contour.representatives();
    oracle.face = [&](Index k) {
      return assemble_block(op, I, J, b.admissible, nodes[static_cast<size_t>(k)], opts.eps_aca);
    };
    oracle.fiber = [&](Index i, Index j) {
      return op.fiber(I[static_cast<size_t>(i)], J[static_cast<size_t>(j)], nodes);
    };
    tensors_.push_back(three_d_aca(oracle, opts.eps, opts.eps_aca, opts.r_max));
  }
  std::map<Index, std::vector<size_t>> groups;
  for (size_t b = 0; b < blocks_->blocks.size(); ++b) groups[blocks_->blocks[b].col].push_back(b);
  col_groups_.assign(groups.begin(), groups.end());
  build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const LinearMap> AcaFamily::at(Complex s) const {
  return build_hmatrix(op_, rows_, cols_, blocks_, s, opts_.eps_aca);
}

Eigen::MatrixXd AcaFamily::convolve(const ConvolutionWeights& w) const {
  if (w.V.rows() != cols() || w.V.cols() != contour_.representatives()) {
    throw DomainError("convolution weights do not match the operator");
  }
  const Index m = w.E.cols();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), m);
  for (const auto& [col, blocks] : col_groups_) {
    const auto& cn = cols_->nodes[static_cast<size_t>(col)];
    Index crosses = 0;
    for (size_t b : blocks) crosses += tensors_[b].rank();
    if (crosses == 0) continue;
    Eigen::MatrixXcd Vj(cn.size(), w.V.cols());
    for (Index j = 0; j < cn.size(); ++j) Vj.row(j) = w.V.row(cols_->perm[static_cast<size_t>(cn.begin + j)]);
    // one product for all fibers of this column cluster
    Eigen::MatrixXcd G(w.E.rows(), crosses * m);
    Index k = 0;
    for (size_t b : blocks) {
      for (const auto& c : tensors_[b].crosses) G.middleCols(m * k++, m) = c.fiber.asDiagonal() * w.E;
    }
    const Eigen::MatrixXcd Z = Vj * G;
    k = 0;
    for (size_t b : blocks) {
      const auto& crs = tensors_[b].crosses;
      if (crs.empty()) continue;
      const auto& rn = rows_->nodes[static_cast<size_t>(blocks_->blocks[b].row)];
      Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(rn.size(), m);
      for (const auto& c : crs) Y += c.face.apply(Z.middleCols(m * k++, m));
      for (Index i = 0; i < rn.size(); ++i) acc.row(rows_->perm[static_cast<size_t>(rn.begin + i)]) += Y.row(i);
    }
  }
  return 2.0 * acc.real();
}

FamilyStats tensor_stats(const std::string& name, const std::vector<CrossApproximation>& tensors,
                         const std::vector<char>& admissible, Index representatives, double dense_bytes) {
  FamilyStats st;
  st.name = name;
  st.dense_bytes = dense_bytes;
  st.frequency_histogram.assign(static_cast<size_t>(representatives), 0);
  for (size_t b = 0; b < tensors.size(); ++b) {
    const auto& t = tensors[b];
    BlockStat bs;
    if (!t.crosses.empty()) {
      bs.rows = t.crosses[0].face.rows();
      bs.cols = t.crosses[0].face.cols();
    }
    bs.admissible = admissible[b] != 0;
    bs.rank = t.rank();
    bs.capped = t.capped;
    bs.frequencies = t.frequencies();
    bs.bytes = t.bytes();
    for (Index k : bs.frequencies) ++st.frequency_histogram[static_cast<size_t>(k)];
    st.compressed_bytes += bs.bytes;
    st.blocks.push_back(std::move(bs));
  }
  return st;
}

FamilyStats AcaFamily::stats() const {
  std::vector<char> adm;
  for (const auto& b : blocks_->blocks) adm.push_back(b.admissible ? 1 : 0);
  FamilyStats st = tensor_stats("aca", tensors_, adm, contour_.representatives(),
                                16.0 * static_cast<double>(rows()) * static_cast<double>(cols()) *
                                    static_cast<double>(contour_.representatives()));
  for (size_t b = 0; b < st.blocks.size(); ++b) {
    st.blocks[b].rows = rows_->nodes[static_cast<size_t>(blocks_->blocks[b].row)].size();
    st.blocks[b].cols = cols_->nodes[static_cast<size_t>(blocks_->blocks[b].col)].size();
  }
  st.build_seconds = build_seconds_;
  return st;
}

}  // namespace tdbem
