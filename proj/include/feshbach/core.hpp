#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "feshbach/blockcalc.hpp"
#include "feshbach/grid.hpp"
#include "feshbach/potential.hpp"
#include "feshbach/radial.hpp"
#include "feshbach/types.hpp"

namespace feshbach::core {

using radial::BoundState;
using radial::Potential;
using radial::RadialGrid;

enum class CaseLabel { Generic, FirstKind, SecondKind, ThirdKind };
std::string_view to_string(CaseLabel c);

/// Grid on (0, r_max) whose panel edges include every breakpoint of V, U and W.
RadialGrid model_grid(const Potential& V, const Potential& U, const Potential& W, double r_max = 25.0,
                      std::size_t n = 600, radial::QuadratureRule rule = radial::QuadratureRule::GaussLegendre);

/// Open channel V, closed channel U shifted by lambda, coupling W.
class ChannelModel {
 public:
  /// Validates the assumptions: U has at least one bound state, V has no zero-energy resonance,
  /// lambda > 0 and lambda is not within 1e-8 (relative) of any |E_j|.
  ChannelModel(Potential V, Potential U, Potential W, double lambda, RadialGrid grid);

  const Potential& V() const { return V_; }
  const Potential& U() const { return U_; }
  const Potential& W() const { return W_; }
  double lambda() const { return lambda_; }
  const RadialGrid& grid() const { return grid_; }
  const std::vector<BoundState>& bound_states_U() const { return bound_U_; }
  /// Zero-energy open-channel eigenfunction, ~ r + A_V(0) at large r.
  const CVec& psi() const { return psi_; }
  double a_v0() const { return a_v0_; }
  /// Coupling samples, set exactly to zero where negligible (relative 1e-20).
  const Vec& w_values() const { return w_; }
  /// Nodes where the coupling is nonzero.
  const std::vector<Eigen::Index>& support() const { return support_; }
  /// R_V(0), computed once per model.
  const std::shared_ptr<const radial::GreensKernel>& open_resolvent_zero() const { return gv0_; }

  ChannelModel with_lambda(double lambda) const;
  ChannelModel with_coupling(const Potential& W) const;

 private:
  ChannelModel() = default;
  void set_coupling(const Potential& W);
  void set_lambda(double lambda);

  Potential V_, U_, W_;
  double lambda_ = 0.0;
  RadialGrid grid_;
  std::vector<BoundState> bound_U_;
  CVec psi_;
  double a_v0_ = 0.0;
  Vec w_;
  std::vector<Eigen::Index> support_;
  std::shared_ptr<const radial::GreensKernel> gv0_;
};

/// Everything needed to act with M(k), N(k) and C^-1(k) at one momentum.
///
/// With W supported on the node set S, X = W R_U W only has an S x S block and M = R_V X only
/// has the columns S. `Xss` is that block, `F` the nonzero columns of M (n x |S|).
struct Sandwich {
  /// Spectrum: Xss and Mss only. Solve: also F and the LU. Full: also the full closed-channel resolvent.
  enum class Detail { Spectrum, Solve, Full };
  double k = 0.0;
  Detail detail = Detail::Full;
  std::shared_ptr<const radial::GreensKernel> GV;
  std::shared_ptr<const radial::GreensKernel> GU;  // null unless detail == Full
  std::vector<Eigen::Index> S;
  CMat Xss;
  CMat F;
  CMat Mss;
  /// LU of I - M_SS.
  Eigen::PartialPivLU<CMat> lu;
};

Sandwich sandwich(const ChannelModel& model, double k, Sandwich::Detail detail = Sandwich::Detail::Full);

/// Apply X = W R_U(k^2 - lambda) W to a grid function.
CVec apply_X(const ChannelModel& model, const Sandwich& s, const CVec& f);

/// Dense M(k) = R_V(k^2) W R_U(k^2 - lambda) W and N(k) = W R_U W R_V as operators on node values.
CMat assemble_M(const ChannelModel& model, double k);
CMat assemble_N(const ChannelModel& model, double k);
CMat assemble_M(const ChannelModel& model, const Sandwich& s);
CMat assemble_N(const ChannelModel& model, const Sandwich& s);

/// Smallest singular value of I - M(k) in the quadrature L2 geometry, by inverse iteration.
double sigma_min(const ChannelModel& model, const Sandwich& s);

/// Solves (I - M(k)) phi = phi_{V,k}.
struct OpenChannelSolution {
  CVec phi;
  CVec phi_v;
  double sigma_min = 0.0;
  double residual = 0.0;  // ||(I - M) phi - phi_V|| / ||phi_V||
};
OpenChannelSolution solve_open_channel(const ChannelModel& model, double k);

/// Both factorizations of the Schur complement inverse, as operators on node values.
struct CInverse {
  CMat left;   // (I - M)^-1 R_V
  CMat right;  // R_V (I - N)^-1
  double agreement = 0.0;  // ||left - right|| / ||left||
  double sigma_min = 0.0;
};
CInverse assemble_C_inverse(const ChannelModel& model, double k);

/// Discretized C(k) = -d^2/dr^2 + V - k^2 - W R_U W applied to a grid function.
CVec apply_C(const ChannelModel& model, const Sandwich& s, const CVec& f);

/// Block resolvent of the two-channel operator at k^2 (open channel first).
blockcalc::Block2x2 full_resolvent(const ChannelModel& model, double k);
/// The same on the decaying branch, z = -kappa^2 < 0.
blockcalc::Block2x2 full_resolvent_decaying(const ChannelModel& model, double kappa);

/// Discretized (H - z) applied to a two-channel state (open, closed).
void apply_H(const ChannelModel& model, cplx z, const CVec& open, const CVec& closed, CVec& out_open,
             CVec& out_closed);

struct KernelSpaceReport {
  double lambda = 0.0;
  std::vector<CVec> basis_M;
  std::vector<CVec> basis_N;
  double sigma_min = 0.0;
  std::vector<cplx> beta;
  double beta_tol = 0.0;
  CaseLabel label = CaseLabel::Generic;
  int dim_M = 0;
  int dim_ME = 0;
  std::vector<double> kernel_residuals;  // ||(I - M(0)) u|| / ||u||
  std::vector<double> c0_residuals;      // ||C(0) u|| / ||V u|| on interior nodes
};

/// Kernel of I - M(0): singular vectors with singular value below tol * sigma_max. The basis is
/// normalized so that (u_i, W R_U(-lambda) W u_j) = delta_ij, and rotated so that only the first
/// vector can have a nonzero resonance coefficient beta = (phi_{V,0}, W R_U W u).
KernelSpaceReport kernel_space(const ChannelModel& model, double tol = 1e-6);

struct DualBasis {
  std::vector<CVec> basis_N;
  CMat pairing;                      // (u_i, v_j)
  std::vector<double> n_residuals;   // ||(I - N(0)) v|| / ||v||
  std::vector<double> inverse_residuals;  // ||R_V(0) v - u|| / ||u||
};
DualBasis dual_basis(const ChannelModel& model, const std::vector<CVec>& basis_M);

struct Classification {
  CaseLabel label = CaseLabel::Generic;
  std::vector<cplx> beta;
  double beta_tol = 0.0;
  double margin = 0.0;  // smallest | |beta| - beta_tol | / beta_tol, or +inf when dim M = 0
};
Classification classify(const ChannelModel& model);
Classification classify(const KernelSpaceReport& report);

/// Resonance tolerance for a normalized kernel vector u: 1e-5 * sum_i w_i |phi_{V,0} v|.
double beta_tolerance(const ChannelModel& model, const CVec& v);

struct TwoChannelState {
  CVec open;
  CVec closed;
};

/// Psi = (u, -R_U(-lambda) W u). Throws InvalidArgument if u is not in the kernel of I - M(0).
TwoChannelState zero_energy_state(const ChannelModel& model, const CVec& u);
/// ||H Psi|| / ||Psi|| on interior nodes.
double zero_energy_residual(const ChannelModel& model, const TwoChannelState& psi);
/// Least-squares slope of log|closed| over [r_lo, r_hi].
double closed_tail_slope(const ChannelModel& model, const TwoChannelState& psi, double r_lo, double r_hi);

/// Effective amplitude A_eff(k) = (phi_{V,k}, W R_U W phi_k) + A_V(k).
cplx effective_amplitude(const ChannelModel& model, double k);
/// The same with a precomputed Solve (or Full) sandwich.
cplx effective_amplitude(const ChannelModel& model, const Sandwich& s);

}  // namespace feshbach::core
