#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "feshbach/grid.hpp"
#include "feshbach/types.hpp"

namespace feshbach::radial {

enum class PotentialFamily { SquareWell, Gaussian, Exponential, PoschlTeller };
enum class PotentialSign { Attractive, Repulsive };
enum class DecayClass { CompactSupport, SuperPolynomial };

PotentialFamily parse_family(std::string_view name);
std::string_view to_string(PotentialFamily family);
PotentialSign parse_sign(std::string_view name);
std::string_view to_string(PotentialSign sign);

/// Analytic radial potential, s-wave units (hbar^2/2m = 1).
///
///   square_well    s * strength                  for r < range, 0 outside
///   gaussian       s * strength * exp(-(r/range)^2)
///   exponential    s * strength * exp(-r/range)
///   poschl_teller  s * strength / cosh(r/range)^2
///
/// with s = -1 for attractive and +1 for repulsive.
struct PotentialSpec {
  PotentialFamily family = PotentialFamily::Gaussian;
  double strength = 0.0;
  double range = 1.0;
  PotentialSign sign = PotentialSign::Repulsive;

  static PotentialSpec square_well(double depth, double radius);
  static PotentialSpec square_barrier(double height, double radius);
  static PotentialSpec gaussian(double amplitude, double width, PotentialSign sign = PotentialSign::Repulsive);
  static PotentialSpec exponential(double amplitude, double range, PotentialSign sign = PotentialSign::Repulsive);
  static PotentialSpec poschl_teller(double depth, double range, PotentialSign sign = PotentialSign::Attractive);

  double value(double r) const;
  DecayClass decay_class() const;
  /// Radii where the potential is discontinuous.
  std::vector<double> breakpoints() const;
  /// Throws InvalidArgument for non-finite or negative strength, or non-positive range.
  void validate() const;
  std::string describe() const;

  bool operator==(const PotentialSpec&) const = default;
};

/// Linear combination of analytic families; the open, closed and coupling potentials of
/// the two-channel model are all of this type (couplings of the form W1 + beta * W2).
class Potential {
 public:
  struct Term {
    double coefficient = 1.0;
    PotentialSpec spec;
    bool operator==(const Term&) const = default;
  };

  Potential() = default;
  Potential(const PotentialSpec& spec) : terms_{Term{1.0, spec}} {}  // NOLINT(google-explicit-constructor)

  static Potential zero() { return Potential{}; }

  Potential& add(double coefficient, const PotentialSpec& spec);
  Potential scaled(double factor) const;

  double value(double r) const;
  bool is_zero() const;
  std::vector<double> breakpoints() const;
  const std::vector<Term>& terms() const { return terms_; }
  /// Largest |term coefficient * strength|, used as the potential's energy scale.
  double scale() const;
  std::string describe() const;

  bool operator==(const Potential&) const = default;

 private:
  std::vector<Term> terms_;
};

struct SampledPotential {
  Vec values;
  bool compactly_supported = true;
  bool super_polynomial = true;
};

SampledPotential eval_potential(const Potential& pot, const RadialGrid& grid);

/// Numerical Ikebe-class decay probe: checks |V(r)| <= c / r^(n + delta) on [r0, r_end]
/// with c fixed by the value at r0 (delta = 1/2).
bool satisfies_decay(const Potential& pot, int n, double r0, double r_end);

}  // namespace feshbach::radial
