#include "feshbach/weighted_norm.hpp"

#include "feshbach/error.hpp"

namespace feshbach::radial {

namespace {

Vec bracket_powers(const RadialGrid& grid, double power) {
  Vec out(grid.nodes().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = japanese_bracket(grid.nodes()[i], power);
  return out;
}

}  // namespace

double weighted_norm(const CVec& f, const RadialGrid& grid, const WeightedNormSpec& spec) {
  require(spec.s >= 0.0, "weight exponent must be non-negative");
  require(f.size() == static_cast<Eigen::Index>(grid.size()), "grid function length mismatch");
  const double p = spec.sign == WeightedNormSpec::Sign::Growth ? spec.s : -spec.s;
  const Vec wt = bracket_powers(grid, 2.0 * p).cwiseProduct(grid.weights());
  return std::sqrt(wt.dot(f.cwiseAbs2()));
}

CMat weighted_operator(const CMat& T, const RadialGrid& grid, double s, double s_prime) {
  require(s >= 0.0 && s_prime >= 0.0, "weight exponents must be non-negative");
  const Vec sq = grid.weights().cwiseSqrt();
  const Vec left = bracket_powers(grid, -s_prime).cwiseProduct(sq);
  const Vec right = bracket_powers(grid, -s).cwiseQuotient(sq);
  return left.cast<cplx>().asDiagonal() * T * right.cast<cplx>().asDiagonal();
}

Vec weighted_singular_values(const CMat& T, const RadialGrid& grid, double s, double s_prime) {
  Eigen::BDCSVD<CMat> svd(weighted_operator(T, grid, s, s_prime));
  return svd.singularValues();
}

double weighted_operator_norm(const CMat& T, const RadialGrid& grid, double s, double s_prime) {
  return weighted_singular_values(T, grid, s, s_prime)[0];
}

}  // namespace feshbach::radial
