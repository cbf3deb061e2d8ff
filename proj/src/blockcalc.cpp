#include "feshbach/blockcalc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "feshbach/error.hpp"

namespace feshbach::blockcalc {

namespace {

using Index = Eigen::Index;

double smallest_singular_ratio(const CMat& A) {
  if (A.size() == 0) return 1.0;
  Eigen::BDCSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  return s[0] > 0.0 ? s[s.size() - 1] / s[0] : 0.0;
}

// Columns of M that are not identically zero.
std::vector<Index> nonzero_columns(const CMat& M) {
  std::vector<Index> cols;
  for (Index j = 0; j < M.cols(); ++j)
    if (M.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);
  return cols;
}

CMat take(const CMat& M, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  CMat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(static_cast<Index>(a), static_cast<Index>(b)) = M(rows[a], cols[b]);
  return out;
}

}  // namespace

CMat Block2x2::assemble() const {
  const Index n0 = L00.rows(), n1 = L11.rows();
  CMat L(n0 + n1, n0 + n1);
  L << L00, L01, L10, L11;
  return L;
}

Block2x2 Block2x2::split(const CMat& L, Index n0) {
  const Index n1 = L.rows() - n0;
  return {L.topLeftCorner(n0, n0), L.topRightCorner(n0, n1), L.bottomLeftCorner(n1, n0), L.bottomRightCorner(n1, n1)};
}

Block2x2 schur_block_inverse(const Block2x2& L) {
  require(L.L00.rows() == L.L00.cols() && L.L11.rows() == L.L11.cols() && L.L01.rows() == L.L00.rows() &&
              L.L01.cols() == L.L11.cols() && L.L10.rows() == L.L11.rows() && L.L10.cols() == L.L00.cols(),
          "incompatible block shapes");
  if (smallest_singular_ratio(L.L11) <= 1e-12)
    fail(ErrorKind::SchurPreconditionFailed, "L11 is numerically singular");
  const CMat L11i = L.L11.partialPivLu().inverse();
  const CMat L11i_L10 = L11i * L.L10;
  const CMat L01_L11i = L.L01 * L11i;
  const CMat C = L.L00 - L.L01 * L11i_L10;
  if (smallest_singular_ratio(C) <= 1e-12)
    fail(ErrorKind::SchurComplementSingular, "Schur complement is numerically singular");
  const CMat Ci = C.partialPivLu().inverse();
  Block2x2 out;
  out.L00 = Ci;
  out.L01 = -Ci * L01_L11i;
  out.L10 = -L11i_L10 * Ci;
  out.L11 = L11i + L11i_L10 * Ci * L01_L11i;
  return out;
}

Block2x2 schur_block_inverse_swapped(const Block2x2& L) {
  const CMat L00i = L.L00.partialPivLu().inverse();
  const CMat C = L.L11 - L.L10 * L00i * L.L01;
  const CMat Ci = C.partialPivLu().inverse();
  Block2x2 out;
  out.L00 = Ci;
  out.L01 = -Ci * L.L10 * L00i;
  out.L10 = -L00i * L.L01 * Ci;
  out.L11 = L00i + L00i * L.L01 * Ci * L.L10 * L00i;
  return out;
}

Eigen::VectorXcd eigenvalues(const CMat& M) {
  const auto cols = nonzero_columns(M);
  const auto n = M.rows();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  if (cols.empty()) return out;
  const CMat sub = take(M, cols, cols);
  // The complex QR iteration stalls on some real inputs; real matrices take the real path.
  if (sub.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::EigenSolver<Mat> es(sub.real(), false);
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericFailure, "eigenvalue iteration did not converge");
    out.head(static_cast<Index>(cols.size())) = es.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<CMat> es(sub, false);
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericFailure, "eigenvalue iteration did not converge");
    out.head(static_cast<Index>(cols.size())) = es.eigenvalues();
  }
  return out;
}

double default_radius(const Eigen::VectorXcd& eigs, double cluster_tol) {
  double nearest = 1.0;  // never larger than the distance to the zero eigenvalue
  for (Index i = 0; i < eigs.size(); ++i) {
    const double d = std::abs(eigs[i] - 1.0);
    if (d > cluster_tol) nearest = std::min(nearest, d);
  }
  return std::min(0.5, 0.5 * nearest);
}

RieszProjector riesz_projection(const CMat& M, double delta, int n_quad) {
  require(M.rows() == M.cols(), "Riesz projection needs a square matrix");
  require(n_quad >= 64, "contour quadrature needs at least 64 nodes");
  const auto n = M.rows();
  const auto cols = nonzero_columns(M);
  const bool compressed = static_cast<Index>(cols.size()) < n;
  const Eigen::VectorXcd eigs = eigenvalues(M);
  if (delta <= 0.0) delta = default_radius(eigs);
  for (Index i = 0; i < eigs.size(); ++i) {
    const double gap = std::abs(std::abs(eigs[i] - 1.0) - delta);
    if (gap < 0.1 * delta) {
      std::ostringstream msg;
      msg << "eigenvalue " << eigs[i] << " lies within " << gap << " of the contour |z-1| = " << delta
          << "; try delta = " << default_radius(eigs);
      fail(ErrorKind::ContourCollision, msg.str());
    }
  }
  RieszProjector P;
  P.radius = delta;
  // With M = F P_S (F the nonzero columns), (z - M)^-1 = (1/z)(I + F (z - M_SS)^-1 P_S) and
  // the 1/z term integrates to zero because the contour excludes the origin.
  const std::vector<Index> all = [&] {
    std::vector<Index> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
  }();
  const std::vector<Index>& S = compressed ? cols : all;
  const CMat Mss = take(M, S, S);
  const auto s = Mss.rows();
  CMat acc = CMat::Zero(s, s);
  const CMat I = CMat::Identity(s, s);
  for (int m = 0; m < n_quad; ++m) {
    const double th = 2.0 * kPi * (m + 0.5) / n_quad;
    const cplx dz = delta * std::exp(kI * th);  // (z - 1), and dz = i (z - 1) dtheta
    const cplx z = 1.0 + dz;
    const CMat Rz = (z * I - Mss).partialPivLu().inverse();
    acc += (compressed ? dz / z : dz) * Rz;
  }
  acc /= static_cast<double>(n_quad);
  if (compressed) {
    CMat F(n, s);
    for (Index b = 0; b < s; ++b) F.col(b) = M.col(S[static_cast<std::size_t>(b)]);
    P.Q = CMat::Zero(n, n);
    const CMat FQ = F * acc;
    for (Index b = 0; b < s; ++b) P.Q.col(S[static_cast<std::size_t>(b)]) = FQ.col(b);
  } else {
    P.Q = acc;
  }
  const double tr = P.Q.trace().real();
  P.rank = static_cast<int>(std::lround(tr));
  P.trace_defect = std::abs(P.Q.trace() - cplx(P.rank, 0.0));
  if (P.trace_defect > 1e-6)
    fail(ErrorKind::NumericFailure, "Riesz projector trace " + std::to_string(tr) + " is not an integer");
  return P;
}

CMat eigen_projector(const CMat& M, cplx center, double radius) {
  CMat V;
  Eigen::VectorXcd ev;
  if (M.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::EigenSolver<Mat> es(M.real());
    V = es.eigenvectors();
    ev = es.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<CMat> es(M);
    V = es.eigenvectors();
    ev = es.eigenvalues();
  }
  Eigen::VectorXcd sel(ev.size());
  for (Index i = 0; i < ev.size(); ++i) sel[i] = std::abs(ev[i] - center) < radius ? 1.0 : 0.0;
  return V * sel.asDiagonal() * V.partialPivLu().inverse();
}

CMat companion_K(const CMat& M, const RieszProjector& Q) {
  const auto n = M.rows();
  const CMat I = CMat::Identity(n, n);
  const CMat A = I - M + Q.Q;
  const Eigen::PartialPivLU<CMat> lu(A);
  if (!(lu.rcond() > 1e-14)) fail(ErrorKind::CompanionSingular, "I - M + Q is numerically singular");
  return lu.solve(I - Q.Q);
}

}  // namespace feshbach::blockcalc
