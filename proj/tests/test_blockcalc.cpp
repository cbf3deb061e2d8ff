#include <random>

#include "doctest.h"
#include "feshbach/blockcalc.hpp"
#include "feshbach/error.hpp"

using namespace feshbach;
using namespace feshbach::blockcalc;

namespace {

CMat random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> d;
  CMat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(d(rng), d(rng));
  return m;
}

double rel_defect(const CMat& a, const CMat& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("scalar block inverse and the swapped arrangement") {
  Block2x2 L;
  L.L00 = CMat::Constant(1, 1, 2.0);
  L.L01 = CMat::Constant(1, 1, 1.0);
  L.L10 = CMat::Constant(1, 1, 1.0);
  L.L11 = CMat::Constant(1, 1, 3.0);
  const CMat inv = L.assemble().inverse();
  const Block2x2 R = schur_block_inverse(L);
  CHECK(rel_defect(R.assemble(), inv) < 1e-14);
  // C = 2 - 1/3 and the (0,0) entry of the inverse is 3/5.
  CHECK(std::abs(R.L00(0, 0) - 0.6) < 1e-14);
  const Block2x2 S = schur_block_inverse_swapped(L);
  CHECK(rel_defect(S.assemble(), inv) > 0.1);
}

TEST_CASE("block inverse on random blocks") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n0 = 1 + t % 4, n1 = 1 + (t * 3) % 5;
    const CMat L = random_matrix(rng, n0 + n1, n0 + n1);
    const Block2x2 R = schur_block_inverse(Block2x2::split(L, n0));
    CHECK(rel_defect(R.assemble() * L, CMat::Identity(n0 + n1, n0 + n1)) < 1e-10);
  }
}

TEST_CASE("block inverse preconditions") {
  Block2x2 L;
  L.L00 = CMat::Identity(2, 2);
  L.L01 = CMat::Zero(2, 2);
  L.L10 = CMat::Zero(2, 2);
  L.L11 = CMat::Zero(2, 2);
  CHECK_THROWS_AS(schur_block_inverse(L), Error);
  try {
    schur_block_inverse(L);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchurPreconditionFailed);
  }
  L.L11 = CMat::Identity(2, 2);
  L.L00 = CMat::Zero(2, 2);
  try {
    schur_block_inverse(L);
    FAIL("expected a singular complement");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchurComplementSingular);
  }
}

TEST_CASE("Riesz projection of diagonal operators") {
  CMat M = CMat::Zero(2, 2);
  M(0, 0) = 1.0;
  M(1, 1) = 0.2;
  const RieszProjector Q = riesz_projection(M);
  CHECK(Q.rank == 1);
  CHECK(std::abs(Q.Q(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(Q.Q(1, 1)) < 1e-12);
  CHECK(Q.trace_defect < 1e-12);
  const CMat K = companion_K(M, Q);
  CMat expected = CMat::Zero(2, 2);
  expected(1, 1) = 1.25;
  CHECK((K - expected).norm() < 1e-12);

  CMat M3 = CMat::Zero(3, 3);
  M3(0, 0) = 1.0;
  M3(1, 1) = 1.0;
  M3(2, 2) = 0.5;
  const RieszProjector Q3 = riesz_projection(M3);
  CHECK(Q3.rank == 2);
  CHECK((Q3.Q * Q3.Q - Q3.Q).norm() < 1e-12);
}

TEST_CASE("projector algebra on a random non-normal operator") {
  std::mt19937_64 rng(11);
  const Eigen::Index n = 6;
  const CMat V = random_matrix(rng, n, n);
  CMat D = CMat::Zero(n, n);
  D(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) D(i, i) = cplx(0.1 * static_cast<double>(i), 0.05);
  const CMat M = V * D * V.inverse();
  const RieszProjector Q = riesz_projection(M);
  CHECK(Q.rank == 1);
  CHECK((Q.Q * Q.Q - Q.Q).norm() / Q.Q.norm() < 1e-10);
  CHECK((Q.Q * M - M * Q.Q).norm() / M.norm() < 1e-10);
  CHECK((Q.Q - eigen_projector(M, 1.0, 0.05)).norm() / Q.Q.norm() < 1e-9);
  const CMat K = companion_K(M, Q);
  const CMat I = CMat::Identity(n, n);
  CHECK((K * M - M * K).norm() / K.norm() < 1e-10);
  CHECK((K * Q.Q).norm() < 1e-10);
  CHECK(((I - M) * K - (I - Q.Q)).norm() < 1e-10);
}

TEST_CASE("contour collision") {
  CMat M = CMat::Zero(2, 2);
  M(0, 0) = 1.0;
  M(1, 1) = 1.3;
  try {
    riesz_projection(M, 0.3);
    FAIL("expected a collision");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ContourCollision);
  }
}
