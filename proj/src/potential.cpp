#include "feshbach/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "feshbach/error.hpp"

namespace feshbach::radial {

PotentialFamily parse_family(std::string_view name) {
  if (name == "square_well") return PotentialFamily::SquareWell;
  if (name == "gaussian") return PotentialFamily::Gaussian;
  if (name == "exponential") return PotentialFamily::Exponential;
  if (name == "poschl_teller") return PotentialFamily::PoschlTeller;
  fail(ErrorKind::InvalidArgument, "unknown potential family '" + std::string(name) + "'");
}

std::string_view to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::SquareWell: return "square_well";
    case PotentialFamily::Gaussian: return "gaussian";
    case PotentialFamily::Exponential: return "exponential";
    case PotentialFamily::PoschlTeller: return "poschl_teller";
  }
  return "?";
}

PotentialSign parse_sign(std::string_view name) {
  if (name == "attractive") return PotentialSign::Attractive;
  if (name == "repulsive") return PotentialSign::Repulsive;
  fail(ErrorKind::InvalidArgument, "unknown potential sign '" + std::string(name) + "'");
}

std::string_view to_string(PotentialSign sign) {
  return sign == PotentialSign::Attractive ? "attractive" : "repulsive";
}

PotentialSpec PotentialSpec::square_well(double depth, double radius) {
  return {PotentialFamily::SquareWell, depth, radius, PotentialSign::Attractive};
}
PotentialSpec PotentialSpec::square_barrier(double height, double radius) {
  return {PotentialFamily::SquareWell, height, radius, PotentialSign::Repulsive};
}
PotentialSpec PotentialSpec::gaussian(double amplitude, double width, PotentialSign sign) {
  return {PotentialFamily::Gaussian, amplitude, width, sign};
}
PotentialSpec PotentialSpec::exponential(double amplitude, double range, PotentialSign sign) {
  return {PotentialFamily::Exponential, amplitude, range, sign};
}
PotentialSpec PotentialSpec::poschl_teller(double depth, double range, PotentialSign sign) {
  return {PotentialFamily::PoschlTeller, depth, range, sign};
}

double PotentialSpec::value(double r) const {
  const double s = sign == PotentialSign::Attractive ? -strength : strength;
  const double x = r / range;
  switch (family) {
    case PotentialFamily::SquareWell: return r < range ? s : 0.0;
    case PotentialFamily::Gaussian: return s * std::exp(-x * x);
    case PotentialFamily::Exponential: return s * std::exp(-x);
    case PotentialFamily::PoschlTeller: {
      if (x > 350.0) return 0.0;
      const double c = std::cosh(x);
      return s / (c * c);
    }
  }
  return 0.0;
}

DecayClass PotentialSpec::decay_class() const {
  return family == PotentialFamily::SquareWell ? DecayClass::CompactSupport : DecayClass::SuperPolynomial;
}

std::vector<double> PotentialSpec::breakpoints() const {
  if (family == PotentialFamily::SquareWell) return {range};
  return {};
}

void PotentialSpec::validate() const {
  if (!std::isfinite(strength) || strength < 0.0)
    fail(ErrorKind::InvalidArgument, "potential strength must be finite and non-negative");
  if (!std::isfinite(range) || range <= 0.0) fail(ErrorKind::InvalidArgument, "potential range must be positive");
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << to_string(family) << " strength=" << strength << " range=" << range << " sign=" << to_string(sign);
  return os.str();
}

Potential& Potential::add(double coefficient, const PotentialSpec& spec) {
  spec.validate();
  terms_.push_back({coefficient, spec});
  return *this;
}

Potential Potential::scaled(double factor) const {
  Potential out = *this;
  for (auto& t : out.terms_) t.coefficient *= factor;
  return out;
}

double Potential::value(double r) const {
  double v = 0.0;
  for (const auto& t : terms_)
    if (t.coefficient != 0.0) v += t.coefficient * t.spec.value(r);
  return v;
}

bool Potential::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coefficient == 0.0 || t.spec.strength == 0.0; });
}

std::vector<double> Potential::breakpoints() const {
  std::vector<double> out;
  for (const auto& t : terms_) {
    if (t.coefficient == 0.0) continue;
    for (double b : t.spec.breakpoints()) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Potential::scale() const {
  double s = 0.0;
  for (const auto& t : terms_) s = std::max(s, std::abs(t.coefficient) * t.spec.strength);
  return s;
}

std::string Potential::describe() const {
  if (terms_.empty()) return "zero";
  std::ostringstream os;
  os.precision(12);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) os << " + ";
    os << terms_[i].coefficient << "*[" << terms_[i].spec.describe() << "]";
  }
  return os.str();
}

SampledPotential eval_potential(const Potential& pot, const RadialGrid& grid) {
  SampledPotential out;
  out.values.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[static_cast<Eigen::Index>(i)] = pot.value(grid.node(i));
  for (const auto& t : pot.terms()) {
    t.spec.validate();
    if (t.spec.decay_class() != DecayClass::CompactSupport) out.compactly_supported = false;
  }
  return out;
}

bool satisfies_decay(const Potential& pot, int n, double r0, double r_end) {
  require(r0 > 0.0 && r_end > r0, "decay probe needs 0 < r0 < r_end");
  const double power = static_cast<double>(n) + 0.5;
  const double c = std::max(std::abs(pot.value(r0)) * std::pow(r0, power), 1e-300);
  constexpr int samples = 2000;
  for (int i = 0; i <= samples; ++i) {
    const double r = r0 * std::pow(r_end / r0, static_cast<double>(i) / samples);
    if (std::abs(pot.value(r)) * std::pow(r, power) > c * (1.0 + 1e-12)) return false;
  }
  return true;
}

}  // namespace feshbach::radial
