#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feshbach/blockcalc.hpp"
#include "feshbach/core.hpp"
#include "feshbach/potential.hpp"

namespace feshbach::expand {

using core::CaseLabel;
using core::ChannelModel;

/// k_m = k0 2^-m, m = 0 .. count-1.
std::vector<double> default_k_sequence(double k0 = 0.1, int count = 7);

struct OrderEstimate {
  double slope = 0.0;
  double ci_low = 0.0;   // 95% bootstrap interval
  double ci_high = 0.0;
  double tail_slope = 0.0;  // slope between the two smallest k
  bool monotone = true;     // norms monotone in k
  bool curvature = false;   // slopes of the two halves differ by more than 0.05
  bool reliable = true;     // monotone and no curvature
};

/// Least-squares slope of log(norm) against log(k) with a seeded bootstrap interval.
OrderEstimate singular_order_estimate(const std::vector<double>& ks, const std::vector<double>& norms,
                                      std::uint64_t seed = 12345, int resamples = 1000);

struct CoefficientCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool informational = false;  // recorded for comparison, not a tolerance
};

struct ExpansionReport {
  CaseLabel case_label = CaseLabel::Generic;
  double lambda = 0.0;
  double s = 0.0;
  double s_prime = 0.0;
  std::vector<double> k_sequence;
  std::vector<double> weighted_norms;     // ||C^-1(k)|| in the (s, s') geometry
  OrderEstimate order;
  double expected_order = 0.0;
  CMat residue;                           // k^-order C^-1(k) at the smallest k
  std::vector<double> residue_errors;     // per k, relative to the predicted residue
  std::vector<double> second_singular;    // per k, second singular value of the scaled operator
  std::vector<double> next_order_errors;  // second kind only
  std::vector<CoefficientCheck> coefficient_checks;
  bool tolerances_met = false;
};

/// The two evaluations of the first-kind coefficient for a kernel vector u with (u, X u) = 1,
/// X = W R_U(-lambda) W. Route one uses the k-derivative of R_V at 0, route two the zero-energy
/// eigenfunction. In the reduced s-wave convention both are purely imaginary; `a` is |route_two|.
struct CoefficientA {
  cplx route_one;
  cplx route_two;
  double a = 0.0;
  double agreement = 0.0;  // |route_one - route_two| / |route_two|
};
/// Throws NumericInconsistency if the routes disagree beyond 1e-3 and AssumptionViolation when
/// |a| < 1e-10 (the kernel vector carries no resonance).
CoefficientA coefficient_a(const ChannelModel& model, const CVec& u);

/// Verifies C^-1(k) = (1/(a k)) |u><u| + O(1) at the model's (critical) lambda.
/// With `strict` a slope outside -1 +- 0.1 throws ExpansionMismatch.
ExpansionReport verify_first_kind(const ChannelModel& model, const std::vector<double>& k_seq = default_k_sequence(),
                                  double s = 1.25, double s_prime = 1.25, bool strict = false);

/// Control run away from critical values: C^-1(k) stays bounded.
ExpansionReport verify_generic(const ChannelModel& model, const std::vector<double>& k_seq = default_k_sequence(),
                               double s = 1.25, double s_prime = 1.25, bool strict = false);

struct GramData {
  CMat A;
  CMat B;                     // A^-1/2
  std::vector<CVec> u_tilde;  // sum_j B_kj u_j
};

struct ZeroEigenspace {
  GramData gram;
  CMat P0;                         // open-channel projector, as an operator on node values
  blockcalc::Block2x2 projector;   // full two-channel projector
  double gram_identity_defect = 0.0;      // ||B A B - I||
  double state_gram_defect = 0.0;         // ||Gram(Psi~) - I||
  double projector_idempotence = 0.0;     // ||P^2 - P|| / ||P||
  double p0_identity_defect = 0.0;        // ||P0 X R_V(0) - P0|| / ||P0||
};

/// Gram matrix A_jk = (u_j, u_k) + (u_j, W R_U^2(-lambda) W u_k), B = A^-1/2 and the projector on
/// the zero-energy eigenspace. Throws GramDegenerate if A is not positive definite.
ZeroEigenspace gram_and_P0(const ChannelModel& model, const std::vector<CVec>& basis_M);

/// T3 = -(1/6) (R_V'''(0) X + 6 R_V'(0) W R_U^2(-lambda) W) as a dense operator (diagnostics).
CMat T3_operator(const ChannelModel& model);
/// T3 applied to a grid function; accurate for smooth f.
CVec apply_T3(const ChannelModel& model, const CVec& f);

/// Verifies C^-1(k) = (1/k^2) P0 - (1/k) P0 X T3 P0 + O(1) at a second-kind point; see the
/// report checks for the sign of the leading term.
ExpansionReport verify_second_kind(const ChannelModel& model, const std::vector<double>& k_seq = default_k_sequence(),
                                   double s = 0.75, double s_prime = 3.75, bool strict = false);

struct TuneResult {
  double lambda = 0.0;
  double beta = 0.0;
  double sigma_min = 0.0;
  double resonance_coefficient = 0.0;  // (phi_{V,0}, X u) for the normalized kernel vector
  double beta_tol = 0.0;
  radial::Potential coupling;
  int evaluations = 0;
};

/// Resonance coefficient along the critical curve lambda_c(beta) of W1 + beta W2.
struct CriticalPoint {
  double lambda = 0.0;
  double coefficient = 0.0;
};
CriticalPoint critical_point(const ChannelModel& base, const radial::Potential& W1, const radial::Potential& W2,
                             double beta, double lambda_lo, double lambda_hi);

/// Finds (lambda*, beta*) where I - M(0) is singular and the kernel vector carries no resonance,
/// for couplings W1 + beta W2, lambda in [lambda_lo, lambda_hi] and beta in [beta_lo, beta_hi].
/// Throws NotFound when the resonance coefficient does not change sign over the beta window.
TuneResult tune_second_kind(const ChannelModel& base, const radial::Potential& W1, const radial::Potential& W2,
                            double lambda_lo, double lambda_hi, double beta_lo, double beta_hi, int beta_samples = 6);

}  // namespace feshbach::expand
