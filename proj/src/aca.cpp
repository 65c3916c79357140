#include "tdbem/aca.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace tdbem {

Eigen::MatrixXcd BlockMatrix::apply(const Eigen::MatrixXcd& X) const {
  if (!low_rank) return D * X;
  if (L.rank() == 0) return Eigen::MatrixXcd::Zero(L.U.rows(), X.cols());
  return L.U * (L.V.adjoint() * X);
}

double BlockMatrix::bytes() const {
  return 16.0 * (low_rank ? static_cast<double>(L.U.size() + L.V.size()) : static_cast<double>(D.size()));
}

double BlockMatrix::norm() const { return std::sqrt(std::max(0.0, frobenius_inner(*this, *this).real())); }

Complex frobenius_inner(const BlockMatrix& A, const BlockMatrix& B) {
  if (!A.low_rank && !B.low_rank) return (A.D.array() * B.D.array().conjugate()).sum();
  if (A.low_rank && B.low_rank) {
    // trace((U_B^H U_A)(V_A^H V_B))
    if (A.L.rank() == 0 || B.L.rank() == 0) return 0.0;
    const Eigen::MatrixXcd left = B.L.U.adjoint() * A.L.U;
    const Eigen::MatrixXcd right = A.L.V.adjoint() * B.L.V;
    return (left.array() * right.transpose().array()).sum();
  }
  if (A.low_rank) {
    // trace(D_B^H U V^H) = sum_k v_k^H D_B^H u_k
    if (A.L.rank() == 0) return 0.0;
    const Eigen::MatrixXcd DU = B.D.adjoint() * A.L.U;
    return (A.L.V.conjugate().array() * DU.array()).sum();
  }
  return std::conj(frobenius_inner(B, A));
}

LowRankBlock aca(Index rows, Index cols, const RowOracle& row, const ColOracle& col, double eps) {
  if (!(eps > 0.0)) throw DomainError("ACA tolerance must be positive");
  const Index kmax = std::min(rows, cols);
  std::vector<Eigen::VectorXcd> us, vs;
  std::vector<char> used(static_cast<size_t>(rows), 0);
  double norm2 = 0.0;
  Index i = 0;
  Index tried = 0;
  while (static_cast<Index>(us.size()) < kmax && tried < rows) {
    used[static_cast<size_t>(i)] = 1;
    ++tried;
    Eigen::VectorXcd r = row(i);
    for (size_t l = 0; l < us.size(); ++l) r -= us[l](i) * vs[l].conjugate();
    Index j = 0;
    const double rmax = r.cwiseAbs().maxCoeff(&j);
    if (rmax < 1e-300) {
      // zero residual row: advance to the next unused row
      Index next = -1;
      for (Index k = 1; k <= rows; ++k) {
        const Index c = (i + k) % rows;
        if (!used[static_cast<size_t>(c)]) {
          next = c;
          break;
        }
      }
      if (next < 0) break;
      i = next;
      continue;
    }
    Eigen::VectorXcd u = col(j);
    for (size_t l = 0; l < us.size(); ++l) u -= us[l] * std::conj(vs[l](j));
    const Eigen::VectorXcd v = (r / r(j)).conjugate();
    double cross = 0.0;
    for (size_t l = 0; l < us.size(); ++l) cross += 2.0 * (us[l].dot(u) * v.dot(vs[l])).real();
    const double uv = u.norm() * v.norm();
    norm2 += cross + uv * uv;
    if (uv <= eps * std::sqrt(std::max(norm2, 0.0))) break;
    us.push_back(u);
    vs.push_back(v);
    // next row: largest entry of the new column among unused rows
    Index next = -1;
    double best = -1.0;
    for (Index k = 0; k < rows; ++k) {
      if (!used[static_cast<size_t>(k)] && std::abs(u(k)) > best) {
        best = std::abs(u(k));
        next = k;
      }
    }
    if (next < 0) break;
    i = next;
  }
  LowRankBlock out;
  out.U.resize(rows, static_cast<Index>(us.size()));
  out.V.resize(cols, static_cast<Index>(us.size()));
  for (size_t l = 0; l < us.size(); ++l) {
    out.U.col(static_cast<Index>(l)) = us[l];
    out.V.col(static_cast<Index>(l)) = vs[l];
  }
  return out;
}

LowRankBlock aca(const std::function<Complex(Index, Index)>& entry, Index rows, Index cols, double eps) {
  auto row = [&](Index i) {
    Eigen::VectorXcd r(cols);
    for (Index j = 0; j < cols; ++j) r(j) = entry(i, j);
    return r;
  };
  auto col = [&](Index j) {
    Eigen::VectorXcd c(rows);
    for (Index i = 0; i < rows; ++i) c(i) = entry(i, j);
    return c;
  };
  return aca(rows, cols, row, col, eps);
}

LowRankBlock recompress(const LowRankBlock& block, double eps) {
  if (block.rank() == 0) return block;
  const Index k = block.rank();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qu(block.U);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qv(block.V);
  const Index ku = std::min(block.U.rows(), k);
  const Index kv = std::min(block.V.rows(), k);
  const Eigen::MatrixXcd Qu = qu.householderQ() * Eigen::MatrixXcd::Identity(block.U.rows(), ku);
  const Eigen::MatrixXcd Qv = qv.householderQ() * Eigen::MatrixXcd::Identity(block.V.rows(), kv);
  const Eigen::MatrixXcd Ru = qu.matrixQR().topRows(ku).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd Rv = qv.matrixQR().topRows(kv).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd core = Ru * Rv.adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Index r = 0;
  while (r < sv.size() && sv(r) > eps * sv(0)) ++r;
  if (eps == 0.0) r = sv.size();
  LowRankBlock out;
  out.U = Qu * svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
  out.V = Qv * svd.matrixV().leftCols(r);
  return out;
}

HMatrix::HMatrix(std::shared_ptr<const ClusterTree> rows, std::shared_ptr<const ClusterTree> cols,
                 std::shared_ptr<const BlockTree> blocks, std::vector<BlockMatrix> data)
    : rows_(std::move(rows)), cols_(std::move(cols)), tree_(std::move(blocks)), data_(std::move(data)) {
  if (data_.size() != tree_->blocks.size()) throw DomainError("block data does not match the block tree");
}

Eigen::VectorXcd HMatrix::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != cols()) throw DomainError("H-matrix matvec dimension mismatch");
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(rows());
  for (size_t b = 0; b < data_.size(); ++b) {
    const auto& rn = rows_->nodes[static_cast<size_t>(tree_->blocks[b].row)];
    const auto& cn = cols_->nodes[static_cast<size_t>(tree_->blocks[b].col)];
    Eigen::VectorXcd xb(cn.size());
    for (Index j = 0; j < cn.size(); ++j) xb(j) = x(cols_->perm[static_cast<size_t>(cn.begin + j)]);
    const Eigen::VectorXcd yb = data_[b].apply(xb);
    for (Index i = 0; i < rn.size(); ++i) y(rows_->perm[static_cast<size_t>(rn.begin + i)]) += yb(i);
  }
  return y;
}

Eigen::MatrixXcd HMatrix::to_dense() const {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(rows(), cols());
  for (size_t b = 0; b < data_.size(); ++b) {
    const auto& rn = rows_->nodes[static_cast<size_t>(tree_->blocks[b].row)];
    const auto& cn = cols_->nodes[static_cast<size_t>(tree_->blocks[b].col)];
    const Eigen::MatrixXcd D = data_[b].dense();
    for (Index i = 0; i < rn.size(); ++i) {
      for (Index j = 0; j < cn.size(); ++j) {
        M(rows_->perm[static_cast<size_t>(rn.begin + i)], cols_->perm[static_cast<size_t>(cn.begin + j)]) += D(i, j);
      }
    }
  }
  return M;
}

double HMatrix::bytes() const {
  double b = 0.0;
  for (const auto& d : data_) b += d.bytes();
  return b;
}

BlockMatrix assemble_block(const LayerOperator& op, const std::vector<Index>& I, const std::vector<Index>& J,
                           bool admissible, Complex s, double eps) {
  BlockMatrix out;
  if (!admissible) {
    out.D = op.block(I, J, s);
    return out;
  }
  out.low_rank = true;
  auto row = [&](Index i) { return op.row(I[static_cast<size_t>(i)], J, s); };
  auto col = [&](Index j) { return op.col(I, J[static_cast<size_t>(j)], s); };
  out.L = recompress(aca(static_cast<Index>(I.size()), static_cast<Index>(J.size()), row, col, eps), eps);
  return out;
}

std::shared_ptr<HMatrix> build_hmatrix(const LayerOperator& op, std::shared_ptr<const ClusterTree> rows,
                                       std::shared_ptr<const ClusterTree> cols,
                                       std::shared_ptr<const BlockTree> blocks, Complex s, double eps) {
  std::vector<BlockMatrix> data;
  data.reserve(blocks->blocks.size());
  for (const auto& b : blocks->blocks) {
    BlockMatrix m = assemble_block(op, rows->indices(b.row), cols->indices(b.col), b.admissible, s, eps);
    if (m.low_rank && m.L.rank() * (m.rows() + m.cols()) >= m.rows() * m.cols()) {
      // factors cost more than the block itself
      m.D = m.L.dense();
      m.L = {};
      m.low_rank = false;
    }
    data.push_back(std::move(m));
  }
  return std::make_shared<HMatrix>(std::move(rows), std::move(cols), std::move(blocks), std::move(data));
}

}  // namespace tdbem
