#pragma once

#include <cstddef>
#include <vector>

#include "feshbach/grid.hpp"
#include "feshbach/potential.hpp"
#include "feshbach/types.hpp"

namespace feshbach::radial {

/// A solution of -y'' + V y = z y (or of the k-series hierarchy) sampled on the grid nodes,
/// together with its values at r = 0 and r = r_max.
struct RadialSolution {
  CVec value;
  CVec derivative;
  cplx value_at_origin{0.0, 0.0};
  cplx derivative_at_origin{0.0, 0.0};
  cplx value_at_end{0.0, 0.0};
  cplx derivative_at_end{0.0, 0.0};
};

/// Fixed-step classical Runge-Kutta integrator for the s-wave radial equation.
///
/// The path visits every grid node and every potential breakpoint; the step is a quarter of
/// the smallest node spacing. Potential samples inside a step are taken strictly inside the
/// step so that discontinuities sitting on breakpoints are resolved from the correct side.
class RadialIntegrator {
 public:
  RadialIntegrator(Potential pot, const RadialGrid& grid);

  const Potential& potential() const { return pot_; }

  /// Regular solution: u(0) = 0, u'(0) = 1.
  RadialSolution regular(cplx z) const;
  /// Integrates inward from r_max with the given data at r_max.
  RadialSolution inward(cplx z, cplx value_end, cplx derivative_end) const;
  /// Number of sign changes of the (real) regular solution on (0, r_max) at real energy.
  int count_nodes(double energy) const;

  /// Coefficients u_0, u_1, ..., u_order of u(r; k) = sum k^n u_n for the regular solution at
  /// z = k^2 (odd coefficients vanish).
  std::vector<RadialSolution> regular_series(int order) const;
  /// Coefficients of the outgoing solution with w = exp(i k r) data at r_max.
  std::vector<RadialSolution> outgoing_series(int order) const;

  /// Sets the fixed step (defaults to a quarter of the smallest node spacing).
  void set_max_step(double h) { h_max_ = h; }
  double max_step() const { return h_max_; }

 private:
  struct Station {
    double r;
    std::ptrdiff_t node;  // grid node index or -1
  };

  // Integrates the hierarchy y_m'' = (V - z) y_m - y_{m-2} along the station path. `state`
  // holds (y_0, y_0', y_1, y_1', ...). Returns solutions per component.
  std::vector<RadialSolution> run(cplx z, std::vector<cplx> state, bool outward, int* sign_changes) const;

  Potential pot_;
  std::vector<Station> stations_;
  std::size_t n_nodes_;
  double r_max_;
  double h_max_;
};

}  // namespace feshbach::radial
