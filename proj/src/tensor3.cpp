#include "tdbem/tensor3.hpp"

#include <cmath>

namespace tdbem {

namespace {

Complex face_entry(const BlockMatrix& f, Index i, Index j) {
  if (!f.low_rank) return f.D(i, j);
  if (f.L.rank() == 0) return 0.0;
  return (f.L.U.row(i).array() * f.L.V.row(j).array().conjugate()).sum();
}

// face - sum_d c_d H_d
BlockMatrix residual_face(BlockMatrix face, const std::vector<FrequencyCross>& crosses, Index k, double face_eps) {
  if (crosses.empty()) return face;
  if (!face.low_rank) {
    for (const auto& c : crosses) face.D -= c.fiber(k) * c.face.dense();
    return face;
  }
  Index r = face.L.rank();
  for (const auto& c : crosses) r += c.face.low_rank ? c.face.L.rank() : 0;
  LowRankBlock lr;
  lr.U.resize(face.rows(), r);
  lr.V.resize(face.cols(), r);
  Index at = face.L.rank();
  lr.U.leftCols(at) = face.L.U;
  lr.V.leftCols(at) = face.L.V;
  for (const auto& c : crosses) {
    if (!c.face.low_rank) throw DomainError("mixed face representations in one block");
    const Index rc = c.face.L.rank();
    lr.U.middleCols(at, rc) = -c.fiber(k) * c.face.L.U;
    lr.V.middleCols(at, rc) = c.face.L.V;
    at += rc;
  }
  face.L = recompress(lr, face_eps);
  return face;
}

}  // namespace

std::vector<Index> CrossApproximation::frequencies() const {
  std::vector<Index> k;
  for (const auto& c : crosses) k.push_back(c.k);
  return k;
}

Eigen::MatrixXcd CrossApproximation::slice(Index k) const {
  if (crosses.empty()) return {};
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(crosses[0].face.rows(), crosses[0].face.cols());
  for (const auto& c : crosses) S += c.fiber(k) * c.face.dense();
  return S;
}

double CrossApproximation::bytes() const {
  double b = 0.0;
  for (const auto& c : crosses) b += c.face.bytes() + 16.0 * static_cast<double>(c.fiber.size());
  return b;
}

FacePivot face_pivot(const BlockMatrix& face) {
  FacePivot p;
  if (face.rows() == 0 || face.cols() == 0) return p;
  const Eigen::MatrixXcd D = face.dense();
  Index i = 0, j = 0;
  const double m = D.cwiseAbs().maxCoeff(&i, &j);
  if (!(m > 0.0)) return p;
  p.i = i;
  p.j = j;
  p.value = D(i, j);
  return p;
}

CrossApproximation three_d_aca(const FaceOracle& oracle, double eps, double face_eps, Index r_max) {
  if (!(eps > 0.0)) throw DomainError("3D-ACA tolerance must be positive");
  const Index nk = oracle.frequencies;
  const Index cap = r_max < 0 ? nk : std::min(r_max, nk);
  CrossApproximation out;
  out.crosses.reserve(static_cast<size_t>(cap + 1));  // the norm recursion keeps pointers
  FrobeniusRecursion norm;
  std::vector<char> used(static_cast<size_t>(nk), 0);
  Index k = 0;
  while (true) {
    if (out.rank() >= cap) {
      out.capped = out.rank() < nk;
      break;
    }
    FrequencyCross c;
    c.k = k;
    c.face = residual_face(oracle.face(k), out.crosses, k, face_eps);
    const FacePivot p = face_pivot(c.face);
    if (p.empty() || std::abs(p.value) < 1e-300) break;
    c.i = p.i;
    c.j = p.j;
    c.pivot = p.value;
    Eigen::VectorXcd f = oracle.fiber(p.i, p.j);
    if (f.size() != nk) throw DomainError("fiber length does not match the frequency count");
    for (const auto& d : out.crosses) f -= face_entry(d.face, p.i, p.j) * d.fiber;
    c.fiber = f / p.value;
    out.crosses.push_back(std::move(c));
    norm.push(out.crosses.back());
    const auto& last = out.crosses.back();
    if (last.face.norm() * last.fiber.norm() <= eps * norm.value()) {
      out.crosses.pop_back();
      break;
    }
    used[static_cast<size_t>(k)] = 1;
    Index next = -1;
    double best = -1.0;
    for (Index q = 0; q < nk; ++q) {
      if (!used[static_cast<size_t>(q)] && std::abs(last.fiber(q)) > best) {
        best = std::abs(last.fiber(q));
        next = q;
      }
    }
    if (next < 0) break;
    k = next;
  }
  return out;
}

void FrobeniusRecursion::push(const FrequencyCross& c) {
  double add = 0.0;
  for (const auto* d : crosses_) add += 2.0 * (frobenius_inner(c.face, d->face) * d->fiber.dot(c.fiber)).real();
  const double nf = c.face.norm() * c.fiber.norm();
  sum_ += add + nf * nf;
  crosses_.push_back(&c);
}

double FrobeniusRecursion::value() const { return std::sqrt(std::max(sum_, 0.0)); }

double recursive_frobenius(const std::vector<FrequencyCross>& crosses) {
  FrobeniusRecursion r;
  for (const auto& c : crosses) r.push(c);
  return r.value();
}

Eigen::VectorXcd separated_convolution(const std::vector<FrequencyCross>& crosses, const Eigen::MatrixXcd& W) {
  if (crosses.empty()) return {};
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(crosses[0].face.rows());
  for (const auto& c : crosses) {
    if (W.rows() != c.face.cols() || W.cols() != c.fiber.size()) {
      throw DomainError("convolution weights do not match the block");
    }
    y += c.face.apply(W * c.fiber);
  }
  return y;
}

Eigen::MatrixXcd separated_convolution(const std::vector<FrequencyCross>& crosses, const Eigen::MatrixXcd& V,
                                       const Eigen::MatrixXcd& E) {
  if (crosses.empty()) return {};
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(crosses[0].face.rows(), E.cols());
  for (const auto& c : crosses) {
    if (V.rows() != c.face.cols() || V.cols() != c.fiber.size() || E.rows() != c.fiber.size()) {
      throw DomainError("convolution weights do not match the block");
    }
    Y += c.face.apply(V * (c.fiber.asDiagonal() * E));
  }
  return Y;
}

}  // namespace tdbem
