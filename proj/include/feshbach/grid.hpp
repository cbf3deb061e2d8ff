#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "feshbach/types.hpp"

namespace feshbach::radial {

enum class QuadratureRule { Trapezoid, GaussLegendre };

QuadratureRule parse_rule(std::string_view name);
std::string_view to_string(QuadratureRule rule);

/// One Gauss-Legendre panel [a, b] holding nodes [begin, begin + order).
struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::size_t begin = 0;
  std::size_t order = 0;
  /// cumulative(i, j) = integral from a to node i of the Lagrange basis function of node j.
  Mat cumulative;
  /// Second-derivative matrix of the panel interpolant, in physical units.
  Mat second_derivative;
};

/// Quadrature grid on (0, r_max) for the reduced radial coordinate.
///
/// The trapezoid rule is realized on the staggered (cell-centred) nodes so that every node
/// lies strictly inside the interval. The Gauss-Legendre rule is composite: panels of
/// roughly `kDefaultPanelOrder` nodes, with panel edges placed on every breakpoint so that
/// piecewise-smooth potentials are integrated at full order. Integral operators with a
/// kink on the diagonal use the panel-local cumulative matrices (product integration).
class RadialGrid {
 public:
  static constexpr std::size_t kDefaultPanelOrder = 20;
  static constexpr std::size_t kMinNodes = 16;

  RadialGrid() = default;

  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return r_max_; }
  QuadratureRule rule() const { return rule_; }
  const Vec& nodes() const { return nodes_; }
  const Vec& weights() const { return weights_; }
  double node(std::size_t i) const { return nodes_[static_cast<Eigen::Index>(i)]; }
  double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  const std::vector<Panel>& panels() const { return panels_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  /// Index of the panel containing node i (GaussLegendre only).
  std::size_t panel_of(std::size_t i) const { return panel_index_[i]; }
  double min_spacing() const { return min_spacing_; }

  double integrate(const Vec& f) const { return weights_.dot(f); }
  cplx integrate(const CVec& f) const { return (weights_.cast<cplx>().array() * f.array()).sum(); }
  /// Bilinear quadrature pairing sum_i w_i f_i g_i (no conjugation).
  cplx pair(const CVec& f, const CVec& g) const {
    return (weights_.cast<cplx>().array() * f.array() * g.array()).sum();
  }
  /// Sesquilinear L2 inner product sum_i w_i conj(f_i) g_i.
  cplx inner(const CVec& f, const CVec& g) const {
    return (weights_.cast<cplx>().array() * f.array().conjugate() * g.array()).sum();
  }
  double norm(const CVec& f) const { return std::sqrt(std::abs(inner(f, f))); }

  /// Second derivative of the piecewise interpolant of f, evaluated at the nodes.
  CVec second_derivative(const CVec& f) const;

  friend RadialGrid build_grid(double r_max, std::size_t n, QuadratureRule rule,
                               std::span<const double> breakpoints, bool relax_min_size);

 private:
  double r_max_ = 0.0;
  QuadratureRule rule_ = QuadratureRule::GaussLegendre;
  Vec nodes_;
  Vec weights_;
  std::vector<Panel> panels_;
  std::vector<std::size_t> panel_index_;
  std::vector<double> breakpoints_;
  double min_spacing_ = 0.0;
};

/// Builds a grid on (0, r_max). Breakpoints inside (0, r_max) become panel edges for the
/// Gauss-Legendre rule. `relax_min_size` lifts the n >= 16 floor (illustrative use only).
RadialGrid build_grid(double r_max, std::size_t n, QuadratureRule rule,
                      std::span<const double> breakpoints = {}, bool relax_min_size = false);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
void gauss_legendre(std::size_t order, Vec& x, Vec& w);

/// <r>^power with <r> = sqrt(1 + r^2).
inline double japanese_bracket(double r, double power) { return std::pow(1.0 + r * r, 0.5 * power); }

}  // namespace feshbach::radial
