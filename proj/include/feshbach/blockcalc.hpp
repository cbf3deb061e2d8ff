#pragma once

#include <vector>

#include "feshbach/types.hpp"

namespace feshbach::blockcalc {

/// Operator on X0 (+) X1 in block form.
struct Block2x2 {
  CMat L00, L01, L10, L11;

  CMat assemble() const;
  static Block2x2 split(const CMat& L, Eigen::Index n0);
};

/// Block inverse with C = L00 - L01 L11^-1 L10 and C^-1 in the (0,0) slot.
/// Throws SchurPreconditionFailed if L11 is singular, SchurComplementSingular if C is.
Block2x2 schur_block_inverse(const Block2x2& L);

/// The index arrangement C = L11 - L10 L00^-1 L01 combined with the same slot layout. Kept
/// only to exhibit that this arrangement does not produce the inverse.
Block2x2 schur_block_inverse_swapped(const Block2x2& L);

struct RieszProjector {
  CMat Q;
  cplx center{1.0, 0.0};
  double radius = 0.0;
  int rank = 0;
  double trace_defect = 0.0;  // |trace Q - rank|
};

/// Eigenvalues of M (all of them; zero columns contribute zeros without an eigensolve).
Eigen::VectorXcd eigenvalues(const CMat& M);

/// Default contour radius: half the distance from 1 to the nearest eigenvalue outside the
/// cluster at 1, capped at 0.5.
double default_radius(const Eigen::VectorXcd& eigs, double cluster_tol = 1e-4);

/// Q = (1/2 pi i) \oint_{|z-1| = delta} (z - M)^-1 dz by the trapezoidal rule on the circle.
/// delta <= 0 selects the default radius. Throws ContourCollision if an eigenvalue lies
/// within delta/10 of the circle.
RieszProjector riesz_projection(const CMat& M, double delta = 0.0, int n_quad = 128);

/// Spectral projector on the eigenvalues inside |z - center| < radius, from a full
/// eigendecomposition (reference construction).
CMat eigen_projector(const CMat& M, cplx center, double radius);

/// K = (I - M + Q)^-1 (I - Q). Throws CompanionSingular if I - M + Q is singular.
CMat companion_K(const CMat& M, const RieszProjector& Q);

}  // namespace feshbach::blockcalc
