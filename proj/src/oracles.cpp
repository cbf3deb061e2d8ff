#include "feshbach/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "feshbach/roots.hpp"

namespace feshbach::oracles {

cplx free_kernel(double k, double r, double s) {
  const double lo = std::min(r, s), hi = std::max(r, s);
  return std::sin(k * lo) * std::exp(kI * (k * hi)) / k;
}

double free_decaying_kernel(double kappa, double r, double s) {
  const double lo = std::min(r, s), hi = std::max(r, s);
  // sinh(a) exp(-b) written without overflow for large arguments.
  return 0.5 * (std::exp(kappa * (lo - hi)) - std::exp(-kappa * (lo + hi))) / kappa;
}

int square_well_count(double depth, double radius) {
  return static_cast<int>(std::floor(std::sqrt(depth) * radius / kPi + 0.5));
}

std::vector<double> square_well_energies(double depth, double radius) {
  std::vector<double> out;
  const double qmax = std::sqrt(depth);
  auto g = [&](double q) { return q * std::cos(q * radius) + std::sqrt(std::max(0.0, depth - q * q)) * std::sin(q * radius); };
  for (int n = 1; n <= square_well_count(depth, radius); ++n) {
    const double a = (n - 0.5) * kPi / radius;
    const double b = std::min(n * kPi / radius, qmax);
    const double q = bracketed_root(g, a, b, 1e-15);
    out.push_back(q * q - depth);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double barrier_amplitude(double height, double radius) {
  const double q = std::sqrt(height);
  return -(radius - std::tanh(q * radius) / q);
}

}  // namespace feshbach::oracles
