#pragma once

#include <vector>

#include "feshbach/types.hpp"

namespace feshbach::oracles {

/// Free outgoing kernel sin(k r<) exp(i k r>) / k.
cplx free_kernel(double k, double r, double s);
/// Free decaying kernel sinh(kappa r<) exp(-kappa r>) / kappa.
double free_decaying_kernel(double kappa, double r, double s);
/// Number of s-wave bound states of a square well: levels with sqrt(U0) R > (n - 1/2) pi.
int square_well_count(double depth, double radius);
/// All bound-state energies of a square well (ascending), from q cot(q R) = -kappa.
std::vector<double> square_well_energies(double depth, double radius);
/// Zero-energy amplitude of a square barrier, -(R - tanh(sqrt(V0) R) / sqrt(V0)).
double barrier_amplitude(double height, double radius);

}  // namespace feshbach::oracles
