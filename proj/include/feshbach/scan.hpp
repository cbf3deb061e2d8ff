#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feshbach/core.hpp"

namespace feshbach::scan {

using core::CaseLabel;
using core::ChannelModel;

/// Real parts of the eigenvalues of M(0) at the model's lambda, descending.
std::vector<double> mu_values(const ChannelModel& model);

/// Top eigenvalues of M(0) followed continuously across a lambda grid.
struct EigenTrace {
  std::vector<double> lambdas;
  Mat mu;                        // rows: lambda samples, columns: tracked curves
  std::vector<double> overlaps;  // smallest matching overlap at each step (1 at the first sample)
  bool ambiguous = false;        // some overlap fell below 0.5: refine the lambda grid
};
EigenTrace eigen_trace(const ChannelModel& family, const std::vector<double>& lambdas, int n_tracks = 3);

/// Geometric lambda grid on [lo, hi] that skips the closed-channel poles |E_j| by 1e-6 (relative).
std::vector<double> geometric_lambdas(const ChannelModel& family, double lo, double hi, int points);

struct CriticalValues {
  std::vector<double> lambdas;    // ascending
  std::vector<double> sigma_min;  // confirmation values
  std::vector<double> spurious;   // crossings not confirmed by sigma_min < 1e-6
};

/// Roots of mu_i(lambda) = 1 in (lo, hi), located by bisection on the number of eigenvalues of
/// M(0) above 1 (which only changes at crossings or at the poles |E_j|) to 1e-12 relative, and
/// confirmed by the smallest singular value of I - M(0).
CriticalValues critical_values(const ChannelModel& family, double lo, double hi);

/// Zero-momentum limit of the effective amplitude.
struct ScatteringLength {
  double value = 0.0;          // evaluated directly at k = 0
  double richardson = 0.0;     // extrapolated from k_m = k0 2^-m
  double error_estimate = 0.0; // last Richardson correction
  std::vector<double> ks;
  std::vector<cplx> amplitudes;
  bool converged = false;      // direct and extrapolated values agree within the estimate
};

/// a_eff(lambda). Throws NearResonance if lambda lies within 1e-6 (relative) of one of
/// `criticals` or I - M(0) is numerically singular.
ScatteringLength effective_scattering_length(const ChannelModel& model, double k0 = 0.1, int terms = 6,
                                             const std::vector<double>& criticals = {});

struct PoleFit {
  double c = 0.0;
  double b = 0.0;
  double q = 0.0;         // optional curvature term
  double residual = 0.0;  // max |a delta - fit| / |c|
  double abs_residual = 0.0;
  double noise_floor = 0.0;  // 1e-6 * max|a| * max|delta|
  bool reliable = true;
};

/// Least squares on a (lambda - lambda_j) = c + b (lambda - lambda_j) [+ q (lambda - lambda_j)^2].
/// Throws FitUnreliable when the residual exceeds 5% of |c| unless `allow_unreliable`.
PoleFit pole_fit(const std::vector<double>& lambdas, const std::vector<double>& a, double lambda_j,
                 bool quadratic = false, bool allow_unreliable = false);

/// Offsets |lambda - lambda_j| used for pole fits: geometric in [lo, hi], both sides.
std::vector<double> pole_offsets(double lambda_j, double lo = 1e-4, double hi = 1e-2, int per_side = 8);

struct ResonanceReport {
  std::vector<double> critical_lambdas;  // descending
  std::vector<double> pole_strengths;
  std::vector<CaseLabel> case_labels;
  std::vector<double> bound_energies;
  std::vector<double> fit_residuals;
  std::vector<double> sigma_min;
  bool interlacing_ok = false;
};

/// The ordering lambda_0 > |E_0| > lambda_1 > |E_1| > ... > lambda_{N-1} > |E_{N-1}| with
/// any further critical value in (0, |E_{N-1}|). `criticals` in any order.
bool interlaces(const std::vector<double>& criticals, const std::vector<double>& bound_energies);

ResonanceReport resonance_report(const ChannelModel& family, double lo, double hi);

struct InterlacingReport {
  bool holds = false;
  std::vector<double> ordered;  // lambda_0, |E_0|, lambda_1, |E_1|, ...
  double largest_eps = 0.0;     // largest coupling scale in [eps, eps_max] with interlacing (bisection)
};

/// Checks the ordering for the coupling scaled by eps and bisects for the largest scale that keeps it.
InterlacingReport interlacing_report(const ChannelModel& family, double eps, double lambda_max,
                                     double eps_max = 1.0, int bisections = 6);

struct FieldMap {
  double slope = 0.0;
  double offset = 0.0;
  double B0 = 0.0;
  double Delta = 0.0;
  double a_bg = 0.0;
  double lambda_j = 0.0;
  double lambda_at_B0 = 0.0;
  double residual = 0.0;  // max |a_fit - a| / (|a| + |a_bg|)
  std::vector<double> B;
  std::vector<double> a;
};

/// Samples a_eff along lambda(B) = offset + slope B and fits a(B) = a_bg (1 - Delta / (B - B0)).
/// Throws InvalidRange unless exactly one critical value is crossed in [B_min, B_max].
FieldMap field_map(const ChannelModel& family, double slope, double offset, double B_min, double B_max,
                   int samples = 41);

/// Fits a(B) = a_bg (1 - Delta/(B - B0)) with B0 searched in [B0_lo, B0_hi].
FieldMap fit_field_law(const std::vector<double>& B, const std::vector<double>& a, double B0_lo, double B0_hi);

}  // namespace feshbach::scan
