#pragma once

#include <vector>

#include "feshbach/grid.hpp"
#include "feshbach/ode.hpp"
#include "feshbach/potential.hpp"
#include "feshbach/types.hpp"

namespace feshbach::radial {

enum class Branch { Outgoing, Decaying };

/// Momentum k with Im k >= 0 and k^2 = z.
cplx momentum_from_energy(cplx z);

/// Dense resolvent of -d^2/dr^2 + V on (0, inf) with a Dirichlet condition at the origin.
///
/// `kernel` holds the samples G(r_i, r_j) = u(r_<) w(r_>) / (u' w - u w'); it is symmetric.
/// `op` is the quadrature operator acting on node values: (op f)_i ~ int G(r_i, s) f(s) ds,
/// with the diagonal kink integrated exactly inside each Gauss-Legendre panel.
struct GreensKernel {
  CMat kernel;
  CMat op;
  cplx energy;
  cplx momentum;
  Branch branch = Branch::Outgoing;
  Potential potential;
  cplx wronskian;  // u w' - u' w
};

/// One term alpha * f(min(r, s)) * g(max(r, s)) of an ordered-separable kernel.
struct SeparableTerm {
  cplx alpha;
  CVec lower;
  CVec upper;
};

CMat separable_kernel(const std::vector<SeparableTerm>& terms, const RadialGrid& grid);
CMat separable_operator(const std::vector<SeparableTerm>& terms, const RadialGrid& grid);
/// Rows and columns S of `separable_operator`.
CMat separable_operator_block(const std::vector<SeparableTerm>& terms, const RadialGrid& grid,
                              const std::vector<Eigen::Index>& S);

/// Operator matrix of the kernel K (samples), i.e. K * diag(w). No kink correction.
CMat kernel_to_operator(const CMat& kernel, const RadialGrid& grid);
/// Kernel samples of an operator matrix, i.e. op * diag(1/w).
CMat operator_to_kernel(const CMat& op, const RadialGrid& grid);

/// u solves -u'' + V u = z u with u(0) = 0, u'(0) = 1.
RadialSolution regular_solution(const Potential& pot, cplx z, const RadialGrid& grid);
/// w solves the same equation with w = exp(i k r) data at r_max, k = momentum_from_energy(z)
/// (exp(-kappa r) when z = -kappa^2). Throws DomainTooSmall if V is not negligible at r_max.
RadialSolution outgoing_solution(const Potential& pot, cplx z, const RadialGrid& grid);
/// Same with an explicit momentum (any complex k, used for analytic continuation).
RadialSolution outgoing_solution_k(const Potential& pot, cplx k, const RadialGrid& grid);

/// u w' - u' w at every node.
CVec wronskian_profile(const RadialSolution& u, const RadialSolution& w);
/// Variation of the Wronskian across the nodes, max_i |W_i - W_mid|, relative to the size
/// max_i (|u_i w'_i| + |u'_i w_i|) of the terms it is built from.
double wronskian_spread(const RadialSolution& u, const RadialSolution& w);

GreensKernel greens_kernel(const Potential& pot, cplx z, const RadialGrid& grid);
GreensKernel greens_kernel_k(const Potential& pot, cplx k, const RadialGrid& grid);
/// Rows and columns S of the Green's operator at momentum k, without the full matrices.
CMat greens_operator_block(const Potential& pot, cplx k, const RadialGrid& grid, const std::vector<Eigen::Index>& S);

struct BoundState {
  double energy = 0.0;
  Vec wavefunction;  // unit quadrature norm, positive slope at the origin
  int index = 0;
};

/// All negative-energy s-wave eigenpairs resolvable on the grid (kappa * r_max >= 1/2).
std::vector<BoundState> bound_states(const Potential& pot, const RadialGrid& grid);

struct ScatteringData {
  double k = 0.0;
  double phase_shift = 0.0;
  cplx amplitude;   // (exp(2 i delta) - 1) / (2 i k); at k = 0 the limit A_V(0) = -a_s
  CVec eigenfunction;  // reduced s-wave profile exp(i delta) sin(kr + delta)/k; r + A_V(0) at k = 0
  cplx s_matrix() const { return std::exp(2.0 * kI * phase_shift); }
};

ScatteringData scattering_data(const Potential& pot, double k, const RadialGrid& grid);

/// k-derivative of R_V(k^2) at k = 0 from the k-series of u and w, cross-checked against
/// Richardson-extrapolated central differences of `greens_kernel_k` along real k.
struct ResolventDerivative {
  int order = 1;
  CMat kernel;
  CMat op;
  double fd_discrepancy = 0.0;  // max |series - fd| / max |series|
};

ResolventDerivative resolvent_k_derivative(const Potential& pot, int order, const RadialGrid& grid);

/// The first derivative through (I - R_V(0) V) R_0'(0) (I - V R_V(0)), R_0'(0) = i r r'.
ResolventDerivative resolvent_derivative_identity(const Potential& pot, const RadialGrid& grid);

}  // namespace feshbach::radial
