#pragma once

#include "feshbach/grid.hpp"
#include "feshbach/types.hpp"

namespace feshbach::radial {

/// Weight <r>^(+s) (growth) or <r>^(-s) (decay).
struct WeightedNormSpec {
  enum class Sign { Growth, Decay };
  double s = 0.0;
  Sign sign = Sign::Growth;
};

/// Quadrature L2 norm of <r>^(+-s) f.
double weighted_norm(const CVec& f, const RadialGrid& grid, const WeightedNormSpec& spec);

/// Largest singular value of diag(<r>^-s') T diag(<r>^-s) as a map on the quadrature L2 space.
/// T acts on node values (quadrature weights already folded in).
double weighted_operator_norm(const CMat& T, const RadialGrid& grid, double s, double s_prime);

/// All singular values of the same weighted operator, descending.
Vec weighted_singular_values(const CMat& T, const RadialGrid& grid, double s, double s_prime);

/// The weighted matrix Omega^(1/2) diag(<r>^-s') T diag(<r>^-s) Omega^(-1/2) whose plain
/// spectral norm is the weighted operator norm.
CMat weighted_operator(const CMat& T, const RadialGrid& grid, double s, double s_prime);

}  // namespace feshbach::radial
