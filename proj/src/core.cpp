#include "feshbach/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "feshbach/error.hpp"

namespace feshbach::core {

namespace {

using Index = Eigen::Index;

CVec take(const CVec& f, const std::vector<Index>& S) {
  CVec out(static_cast<Index>(S.size()));
  for (std::size_t a = 0; a < S.size(); ++a) out[static_cast<Index>(a)] = f[S[a]];
  return out;
}

CMat take_rows(const CMat& M, const std::vector<Index>& S) {
  CMat out(static_cast<Index>(S.size()), M.cols());
  for (std::size_t a = 0; a < S.size(); ++a) out.row(static_cast<Index>(a)) = M.row(S[a]);
  return out;
}

CMat take_cols(const CMat& M, const std::vector<Index>& S) {
  CMat out(M.rows(), static_cast<Index>(S.size()));
  for (std::size_t a = 0; a < S.size(); ++a) out.col(static_cast<Index>(a)) = M.col(S[a]);
  return out;
}

double wnorm(const RadialGrid& g, const CVec& f) { return g.norm(f); }

Sandwich make_sandwich(const ChannelModel& model, cplx kv, cplx ku, double k, Sandwich::Detail detail) {
  Sandwich s;
  s.k = k;
  s.detail = detail;
  s.GV = kv == cplx{0.0, 0.0} ? model.open_resolvent_zero()
                               : std::make_shared<const radial::GreensKernel>(radial::greens_kernel_k(model.V(), kv, model.grid()));
  s.S = model.support();
  const auto m = static_cast<Index>(s.S.size());
  const Vec& w = model.w_values();
  Vec ws(m);
  for (Index a = 0; a < m; ++a) ws[a] = w[s.S[a]];
  if (detail == Sandwich::Detail::Full) {
    s.GU = std::make_shared<const radial::GreensKernel>(radial::greens_kernel_k(model.U(), ku, model.grid()));
    s.Xss.resize(m, m);
    for (Index b = 0; b < m; ++b)
      for (Index a = 0; a < m; ++a) s.Xss(a, b) = s.GU->op(s.S[a], s.S[b]);
  } else {
    s.Xss = radial::greens_operator_block(model.U(), ku, model.grid(), s.S);
  }
  s.Xss = ws.cast<cplx>().asDiagonal() * s.Xss * ws.cast<cplx>().asDiagonal();
  if (detail == Sandwich::Detail::Spectrum) {
    CMat gss(m, m);
    for (Index b = 0; b < m; ++b)
      for (Index a = 0; a < m; ++a) gss(a, b) = s.GV->op(s.S[a], s.S[b]);
    s.Mss = gss * s.Xss;
    return s;
  }
  s.F = take_cols(s.GV->op, s.S) * s.Xss;
  s.Mss = take_rows(s.F, s.S);
  s.lu = Eigen::PartialPivLU<CMat>(CMat::Identity(m, m) - s.Mss);
  return s;
}

}  // namespace

std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::Generic: return "Generic";
    case CaseLabel::FirstKind: return "FirstKind";
    case CaseLabel::SecondKind: return "SecondKind";
    case CaseLabel::ThirdKind: return "ThirdKind";
  }
  return "Unknown";
}

RadialGrid model_grid(const Potential& V, const Potential& U, const Potential& W, double r_max, std::size_t n,
                      radial::QuadratureRule rule) {
  std::vector<double> bp;
  for (const auto* p : {&V, &U, &W})
    for (double b : p->breakpoints()) bp.push_back(b);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return radial::build_grid(r_max, n, rule, bp);
}

ChannelModel::ChannelModel(Potential V, Potential U, Potential W, double lambda, RadialGrid grid)
    : V_(std::move(V)), U_(std::move(U)), grid_(std::move(grid)) {
  bound_U_ = radial::bound_states(U_, grid_);
  if (bound_U_.empty())
    fail(ErrorKind::AssumptionViolation, "closed-channel potential " + U_.describe() + " has no bound state");
  const auto sd = radial::scattering_data(V_, 0.0, grid_);
  psi_ = sd.eigenfunction;
  a_v0_ = sd.amplitude.real();
  gv0_ = std::make_shared<const radial::GreensKernel>(radial::greens_kernel(V_, 0.0, grid_));
  set_coupling(W);
  set_lambda(lambda);
}

void ChannelModel::set_coupling(const Potential& W) {
  W_ = W;
  if (!W_.is_zero() && std::abs(W_.value(grid_.r_max())) > 1e-12 * W_.scale())
    fail(ErrorKind::DomainTooSmall, "coupling " + W_.describe() + " is not negligible at r_max");
  w_ = radial::eval_potential(W_, grid_).values;
  const double wmax = w_.cwiseAbs().maxCoeff();
  support_.clear();
  for (Index i = 0; i < w_.size(); ++i) {
    if (std::abs(w_[i]) <= 1e-20 * wmax) w_[i] = 0.0;
    if (w_[i] != 0.0) support_.push_back(i);
  }
}

void ChannelModel::set_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
  for (const auto& b : bound_U_)
    if (std::abs(lambda + b.energy) <= 1e-8 * std::abs(b.energy))
      fail(ErrorKind::AtEigenvalue, "lambda coincides with |E_" + std::to_string(b.index) + "| = " +
                                        std::to_string(-b.energy));
  lambda_ = lambda;
}

ChannelModel ChannelModel::with_lambda(double lambda) const {
  ChannelModel m = *this;
  m.set_lambda(lambda);
  return m;
}

ChannelModel ChannelModel::with_coupling(const Potential& W) const {
  ChannelModel m = *this;
  m.set_coupling(W);
  return m;
}

Sandwich sandwich(const ChannelModel& model, double k, Sandwich::Detail detail) {
  require(k >= 0.0, "momentum must be non-negative");
  if (!(k * k < model.lambda())) fail(ErrorKind::InvalidArgument, "k^2 must lie below the threshold lambda");
  return make_sandwich(model, cplx{k, 0.0}, kI * std::sqrt(model.lambda() - k * k), k, detail);
}

CVec apply_X(const ChannelModel& model, const Sandwich& s, const CVec& f) {
  CVec out = CVec::Zero(f.size());
  const CVec y = s.Xss * take(f, s.S);
  for (std::size_t a = 0; a < s.S.size(); ++a) out[s.S[a]] = y[static_cast<Index>(a)];
  (void)model;
  return out;
}

CMat assemble_M(const ChannelModel& model, const Sandwich& s) {
  const auto n = static_cast<Index>(model.grid().size());
  CMat M = CMat::Zero(n, n);
  for (std::size_t a = 0; a < s.S.size(); ++a) M.col(s.S[a]) = s.F.col(static_cast<Index>(a));
  return M;
}

CMat assemble_N(const ChannelModel& model, const Sandwich& s) {
  const auto n = static_cast<Index>(model.grid().size());
  CMat N = CMat::Zero(n, n);
  const CMat rows = s.Xss * take_rows(s.GV->op, s.S);
  for (std::size_t a = 0; a < s.S.size(); ++a) N.row(s.S[a]) = rows.row(static_cast<Index>(a));
  return N;
}

CMat assemble_M(const ChannelModel& model, double k) { return assemble_M(model, sandwich(model, k)); }
CMat assemble_N(const ChannelModel& model, double k) { return assemble_N(model, sandwich(model, k)); }

double sigma_min(const ChannelModel& model, const Sandwich& s) {
  // Work with B = Omega^(1/2) (I - M) Omega^(-1/2). Ordering the nodes as (S, rest),
  // B = [[A, 0], [-F_c, I]] with A = I - M_SS, so B^-1 and B^-H need only the LU of A.
  const RadialGrid& g = model.grid();
  const auto n = static_cast<Index>(g.size());
  const auto m = static_cast<Index>(s.S.size());
  if (m == 0) return 1.0;
  const Vec sq = g.weights().cwiseSqrt();
  std::vector<char> in_s(static_cast<std::size_t>(n), 0);
  for (Index i : s.S) in_s[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> C;
  for (Index i = 0; i < n; ++i)
    if (!in_s[static_cast<std::size_t>(i)]) C.push_back(i);
  Vec sq_s(m), sq_c(static_cast<Index>(C.size()));
  for (Index a = 0; a < m; ++a) sq_s[a] = sq[s.S[a]];
  for (std::size_t a = 0; a < C.size(); ++a) sq_c[static_cast<Index>(a)] = sq[C[a]];
  // Weighted F_c = Omega_c^(1/2) F_c Omega_S^(-1/2).
  const CMat Fc = sq_c.cast<cplx>().asDiagonal() * take_rows(s.F, C) * sq_s.cwiseInverse().cast<cplx>().asDiagonal();
  const auto Ssc = sq_s.cast<cplx>().asDiagonal();
  const auto Ssi = sq_s.cwiseInverse().cast<cplx>().asDiagonal();
  // A_w^-1 y = Omega_S^(1/2) (I - M_SS)^-1 Omega_S^(-1/2) y.
  auto solve_A = [&](const CVec& y) -> CVec { return Ssc * s.lu.solve(CVec(Ssi * y)); };
  auto solve_AH = [&](const CVec& y) -> CVec { return Ssi * CVec(s.lu.transpose().solve(CVec((Ssc * y).conjugate()))).conjugate(); };

  const Index nc = static_cast<Index>(C.size());
  CVec xs = CVec::Ones(m), xc = CVec::Zero(nc);
  double nrm = std::sqrt(xs.squaredNorm() + xc.squaredNorm());
  xs /= nrm;
  double sigma = 0.0;
  for (int it = 0; it < 1000; ++it) {
    // y = B^-H x
    const CVec yc = xc;
    const CVec ys = solve_AH(CVec(xs + Fc.adjoint() * yc));
    // x' = B^-1 y
    const CVec zs = solve_A(ys);
    const CVec zc = yc + Fc * zs;
    const double ny2 = ys.squaredNorm() + yc.squaredNorm();
    const double next = 1.0 / std::sqrt(ny2);
    nrm = std::sqrt(zs.squaredNorm() + zc.squaredNorm());
    xs = zs / nrm;
    xc = zc / nrm;
    if (it > 3 && std::abs(next - sigma) <= 1e-12 * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

namespace {

OpenChannelSolution solve_with(const ChannelModel& model, const Sandwich& s, const CVec& phi_v) {
  const double k = s.k;
  OpenChannelSolution out;
  out.phi_v = phi_v;
  out.sigma_min = sigma_min(model, s);
  if (out.sigma_min <= 1e-8)
    fail(ErrorKind::NearResonance, "I - M(k) is singular at k = " + std::to_string(k) +
                                       " (sigma_min = " + std::to_string(out.sigma_min) + ")");
  const CVec phi_s = s.lu.solve(take(out.phi_v, s.S));
  out.phi = out.phi_v + s.F * phi_s;
  const CVec res = out.phi - s.F * take(out.phi, s.S) - out.phi_v;
  out.residual = wnorm(model.grid(), res) / wnorm(model.grid(), out.phi_v);
  return out;
}

}  // namespace

OpenChannelSolution solve_open_channel(const ChannelModel& model, double k) {
  const Sandwich s = sandwich(model, k, Sandwich::Detail::Solve);
  return solve_with(model, s, k == 0.0 ? model.psi() : radial::scattering_data(model.V(), k, model.grid()).eigenfunction);
}

CInverse assemble_C_inverse(const ChannelModel& model, double k) {
  const Sandwich s = sandwich(model, k, Sandwich::Detail::Solve);
  CInverse out;
  out.sigma_min = sigma_min(model, s);
  if (out.sigma_min <= 1e-8)
    fail(ErrorKind::NearResonance, "Schur complement is singular at k = " + std::to_string(k) +
                                       " (sigma_min = " + std::to_string(out.sigma_min) + ")");
  const CMat& AV = s.GV->op;
  const CMat AV_S = take_rows(AV, s.S);
  out.left = AV + s.F * s.lu.solve(AV_S);
  const CMat NS = s.Xss * AV_S;
  const CMat Nss = take_cols(NS, s.S);
  const auto m = static_cast<Index>(s.S.size());
  out.right = AV + take_cols(AV, s.S) * (CMat::Identity(m, m) - Nss).partialPivLu().solve(NS);
  out.agreement = (out.left - out.right).cwiseAbs().maxCoeff() / out.left.cwiseAbs().maxCoeff();
  return out;
}

CVec apply_C(const ChannelModel& model, const Sandwich& s, const CVec& f) {
  const Vec v = radial::eval_potential(model.V(), model.grid()).values;
  return -model.grid().second_derivative(f) + (v.cast<cplx>().array() * f.array()).matrix() - s.k * s.k * f -
         apply_X(model, s, f);
}

namespace {

blockcalc::Block2x2 resolvent_blocks(const ChannelModel& model, const Sandwich& s) {
  const CMat& AV = s.GV->op;
  const CMat AV_S = take_rows(AV, s.S);
  const CMat Cinv = AV + s.F * s.lu.solve(AV_S);
  const auto wd = model.w_values().cast<cplx>().asDiagonal();
  const CMat& AU = s.GU->op;
  blockcalc::Block2x2 R;
  R.L00 = Cinv;
  R.L01 = -Cinv * (wd * AU);
  R.L10 = -(AU * wd) * Cinv;
  R.L11 = AU - R.L10 * (wd * AU);
  return R;
}

}  // namespace

blockcalc::Block2x2 full_resolvent(const ChannelModel& model, double k) {
  return resolvent_blocks(model, sandwich(model, k));
}

blockcalc::Block2x2 full_resolvent_decaying(const ChannelModel& model, double kappa) {
  require(kappa > 0.0, "kappa must be positive");
  const Sandwich s =
      make_sandwich(model, kI * kappa, kI * std::sqrt(model.lambda() + kappa * kappa), 0.0, Sandwich::Detail::Full);
  return resolvent_blocks(model, s);
}

void apply_H(const ChannelModel& model, cplx z, const CVec& open, const CVec& closed, CVec& out_open,
             CVec& out_closed) {
  const RadialGrid& g = model.grid();
  const CVec v = radial::eval_potential(model.V(), g).values.cast<cplx>();
  const CVec u = radial::eval_potential(model.U(), g).values.cast<cplx>();
  const CVec w = model.w_values().cast<cplx>();
  out_open = -g.second_derivative(open) + (v.array() * open.array()).matrix() - z * open +
             (w.array() * closed.array()).matrix();
  out_closed = -g.second_derivative(closed) + ((u.array() + model.lambda()) * closed.array()).matrix() -
               z * closed + (w.array() * open.array()).matrix();
}

double beta_tolerance(const ChannelModel& model, const CVec& v) {
  const RadialGrid& g = model.grid();
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += g.weights()[i] * std::abs(model.psi()[i] * v[i]);
  return 1e-5 * s;
}

namespace {

CaseLabel label_for(int dim_M, int dim_ME) {
  if (dim_M == 0) return CaseLabel::Generic;
  if (dim_ME == 0) return CaseLabel::FirstKind;
  if (dim_ME == dim_M) return CaseLabel::SecondKind;
  return CaseLabel::ThirdKind;
}

}  // namespace

KernelSpaceReport kernel_space(const ChannelModel& model, double tol) {
  const RadialGrid& g = model.grid();
  const auto n = static_cast<Index>(g.size());
  const Sandwich s = sandwich(model, 0.0, Sandwich::Detail::Solve);
  KernelSpaceReport rep;
  rep.lambda = model.lambda();
  const Vec sq = g.weights().cwiseSqrt();
  const CMat M = assemble_M(model, s);
  const CMat B = sq.cast<cplx>().asDiagonal() * (CMat::Identity(n, n) - M) * sq.cwiseInverse().cast<cplx>().asDiagonal();
  Eigen::BDCSVD<CMat> svd(B, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  rep.sigma_min = sigma_min(model, s);
  std::vector<CVec> raw;
  for (Index i = n - 1; i >= 0 && sv[i] < tol * sv[0]; --i)
    raw.push_back(sq.cwiseInverse().cast<cplx>().asDiagonal() * svd.matrixV().col(i));
  rep.dim_M = static_cast<int>(raw.size());
  if (raw.empty()) {
    rep.label = CaseLabel::Generic;
    return rep;
  }
  // M(0) is real: pick a real orthonormal basis of the span.
  const auto d = static_cast<Index>(raw.size());
  Mat stacked(n, 2 * d);
  for (Index j = 0; j < d; ++j) {
    stacked.col(2 * j) = sq.asDiagonal() * raw[static_cast<std::size_t>(j)].real();
    stacked.col(2 * j + 1) = sq.asDiagonal() * raw[static_cast<std::size_t>(j)].imag();
  }
  Eigen::JacobiSVD<Mat> rs(stacked, Eigen::ComputeThinU);
  Mat Ub = sq.cwiseInverse().asDiagonal() * rs.matrixU().leftCols(d);
  // Normalize by the pairing (u_i, X u_j) = delta_ij.
  Mat XU(n, d);
  for (Index j = 0; j < d; ++j) XU.col(j) = apply_X(model, s, Ub.col(j).cast<cplx>()).real();
  const Mat P = Ub.transpose() * g.weights().asDiagonal() * XU;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    fail(ErrorKind::IsomorphismViolation, "pairing (u, W R_U W u) is not positive on the kernel");
  const Mat Pm = es.operatorInverseSqrt();
  Ub = Ub * Pm;
  XU = XU * Pm;
  // Rotate so that only the first vector carries a resonance coefficient.
  Vec beta = XU.transpose() * g.weights().asDiagonal() * model.psi().real();
  if (d >= 2 && beta.norm() > 0.0) {
    Vec h = beta;
    h[0] += (beta[0] >= 0.0 ? 1.0 : -1.0) * beta.norm();
    const Mat H = Mat::Identity(d, d) - 2.0 * h * h.transpose() / h.squaredNorm();
    Ub = Ub * H;
    XU = XU * H;
    beta = XU.transpose() * g.weights().asDiagonal() * model.psi().real();
  }
  // Fix signs: positive overlap with the coupling-weighted closed-channel ground state.
  const Vec eta0 = model.bound_states_U().front().wavefunction;
  for (Index j = 0; j < d; ++j) {
    const double ov = g.integrate(Vec(eta0.cwiseProduct(model.w_values()).cwiseProduct(Ub.col(j))));
    if (ov < 0.0) {
      Ub.col(j) *= -1.0;
      XU.col(j) *= -1.0;
      beta[j] *= -1.0;
    }
  }
  rep.beta_tol = beta_tolerance(model, XU.col(0).cast<cplx>());
  const CMat Mfull = M;
  const Vec v = radial::eval_potential(model.V(), g).values;
  for (Index j = 0; j < d; ++j) {
    const CVec u = Ub.col(j).cast<cplx>();
    rep.basis_M.push_back(u);
    rep.basis_N.push_back(XU.col(j).cast<cplx>());
    rep.beta.emplace_back(beta[j], 0.0);
    rep.kernel_residuals.push_back(wnorm(g, CVec(u - Mfull * u)) / wnorm(g, u));
    const CVec cu = apply_C(model, s, u);
    const CVec d2 = g.second_derivative(u);
    rep.c0_residuals.push_back(wnorm(g, cu) / wnorm(g, d2));
  }
  rep.dim_ME = 0;
  for (const auto& b : rep.beta)
    if (std::abs(b) <= rep.beta_tol) ++rep.dim_ME;
  rep.label = label_for(rep.dim_M, rep.dim_ME);
  return rep;
}

DualBasis dual_basis(const ChannelModel& model, const std::vector<CVec>& basis_M) {
  const RadialGrid& g = model.grid();
  const Sandwich s = sandwich(model, 0.0, Sandwich::Detail::Solve);
  DualBasis out;
  const auto d = static_cast<Index>(basis_M.size());
  out.pairing = CMat::Zero(d, d);
  for (const auto& u : basis_M) {
    const CVec v = apply_X(model, s, u);
    if (wnorm(g, v) < 1e-12 * std::max(1.0, wnorm(g, u)))
      fail(ErrorKind::IsomorphismViolation, "W R_U W maps a kernel vector to (numerically) zero");
    out.basis_N.push_back(v);
    const CVec AVv = s.GV->op * v;
    const CVec Nv = apply_X(model, s, AVv);
    out.n_residuals.push_back(wnorm(g, CVec(v - Nv)) / wnorm(g, v));
    out.inverse_residuals.push_back(wnorm(g, CVec(AVv - u)) / wnorm(g, u));
  }
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      out.pairing(i, j) = g.pair(basis_M[static_cast<std::size_t>(i)], out.basis_N[static_cast<std::size_t>(j)]);
  return out;
}

Classification classify(const KernelSpaceReport& rep) {
  Classification c;
  c.label = rep.label;
  c.beta = rep.beta;
  c.beta_tol = rep.beta_tol;
  c.margin = std::numeric_limits<double>::infinity();
  for (const auto& b : rep.beta) c.margin = std::min(c.margin, std::abs(std::abs(b) - rep.beta_tol) / rep.beta_tol);
  int above = 0;
  for (const auto& b : rep.beta)
    if (std::abs(b) > rep.beta_tol) ++above;
  if (above > 1)
    fail(ErrorKind::NumericInconsistency, "more than one kernel vector carries a resonance; refine the grid");
  return c;
}

Classification classify(const ChannelModel& model) { return classify(kernel_space(model)); }

TwoChannelState zero_energy_state(const ChannelModel& model, const CVec& u) {
  const RadialGrid& g = model.grid();
  const Sandwich s = sandwich(model, 0.0);
  const CVec Mu = s.F * take(u, s.S);
  if (wnorm(g, CVec(u - Mu)) > 1e-5 * wnorm(g, u))
    fail(ErrorKind::InvalidArgument, "vector is not in the kernel of I - M(0)");
  TwoChannelState st;
  st.open = u;
  st.closed = -(s.GU->op * (model.w_values().cast<cplx>().array() * u.array()).matrix());
  return st;
}

double zero_energy_residual(const ChannelModel& model, const TwoChannelState& psi) {
  CVec ro, rc;
  apply_H(model, 0.0, psi.open, psi.closed, ro, rc);
  const RadialGrid& g = model.grid();
  const double num = std::sqrt(std::pow(wnorm(g, ro), 2) + std::pow(wnorm(g, rc), 2));
  const double den = std::sqrt(std::pow(wnorm(g, psi.open), 2) + std::pow(wnorm(g, psi.closed), 2));
  return num / den;
}

double closed_tail_slope(const ChannelModel& model, const TwoChannelState& psi, double r_lo, double r_hi) {
  const Vec& r = model.grid().nodes();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Index i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    const double y = std::log(std::abs(psi.closed[i]));
    sx += r[i];
    sy += y;
    sxx += r[i] * r[i];
    sxy += r[i] * y;
    ++m;
  }
  require(m >= 2, "tail window holds fewer than two nodes");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

cplx effective_amplitude(const ChannelModel& model, const Sandwich& s) {
  require(s.detail != Sandwich::Detail::Spectrum, "effective_amplitude needs a Solve or Full sandwich");
  if (s.k == 0.0) {
    const auto sol = solve_with(model, s, model.psi());
    return model.a_v0() + model.grid().pair(sol.phi_v, apply_X(model, s, sol.phi));
  }
  const auto sd = radial::scattering_data(model.V(), s.k, model.grid());
  const auto sol = solve_with(model, s, sd.eigenfunction);
  return sd.amplitude + model.grid().pair(sol.phi_v, apply_X(model, s, sol.phi));
}

cplx effective_amplitude(const ChannelModel& model, double k) {
  return effective_amplitude(model, sandwich(model, k, Sandwich::Detail::Solve));
}

}  // namespace feshbach::core
