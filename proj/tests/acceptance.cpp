// Acceptance checks for the reference model: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "feshbach/blockcalc.hpp"
#include "feshbach/core.hpp"
#include "feshbach/error.hpp"
#include "feshbach/expand.hpp"
#include "feshbach/lab.hpp"
#include "feshbach/oracles.hpp"
#include "feshbach/radial.hpp"
#include "feshbach/scan.hpp"

using namespace feshbach;
using core::ChannelModel;
using radial::Potential;
using radial::PotentialSpec;

namespace {

const Potential kV = PotentialSpec::square_barrier(4.0, 1.0);
const Potential kU = PotentialSpec::square_well(4.0, 1.0);
const Potential kW = PotentialSpec::gaussian(4.0, 1.0);
const Potential kW2 = PotentialSpec::gaussian(1.0, 2.0);

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

ChannelModel reference_model(double lambda, const Potential& W = kW, const Potential& U = kU) {
  return ChannelModel(kV, U, W, lambda, core::model_grid(kV, U, W));
}

// Results reused by several criteria.
struct Shared {
  std::optional<ChannelModel> family;
  std::optional<scan::CriticalValues> criticals;
  std::optional<expand::TuneResult> tuned;
  double tune_seconds = 0.0;

  const ChannelModel& ref() {
    if (!family) family = reference_model(1.0);
    return *family;
  }
  double E0() { return ref().bound_states_U().front().energy; }
  const scan::CriticalValues& crit() {
    if (!criticals) criticals = scan::critical_values(ref(), 0.02, 4.0 * std::abs(E0()));
    return *criticals;
  }
  double lambda0() {
    if (crit().lambdas.empty()) fail(ErrorKind::NotFound, "no critical value in the reference sweep");
    return crit().lambdas.front();
  }
  const expand::TuneResult& tune() {
    if (!tuned) {
      const auto t0 = std::chrono::steady_clock::now();
      const double e = std::abs(E0());
      tuned = expand::tune_second_kind(ref(), kW, kW2, e * (1.0 + 1e-6), 8.0 * e, -1.5, -1.0, 2);
      tune_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return *tuned;
  }
  ChannelModel second_kind_model() { return ref().with_coupling(tune().coupling).with_lambda(tune().lambda); }
};

Shared shared;

Outcome free_kernels() {
  const auto g = core::model_grid(Potential::zero(), Potential::zero(), Potential::zero());
  double worst = 0.0;
  auto compare = [&](const radial::GreensKernel& gk, const std::function<cplx(double, double)>& f) {
    const auto& r = g.nodes();
    for (Eigen::Index i = 0; i < r.size(); ++i)
      for (Eigen::Index j = 0; j < r.size(); ++j) worst = std::max(worst, std::abs(gk.kernel(i, j) - f(r[i], r[j])));
  };
  for (double k : {0.1, 0.5, 1.0})
    compare(radial::greens_kernel(Potential::zero(), cplx(k * k, 0.0), g),
            [k](double r, double s) { return oracles::free_kernel(k, r, s); });
  for (double kappa : {0.5, 1.0})
    compare(radial::greens_kernel(Potential::zero(), cplx(-kappa * kappa, 0.0), g),
            [kappa](double r, double s) { return cplx(oracles::free_decaying_kernel(kappa, r, s), 0.0); });
  return {worst <= 1e-8, "max entry error " + fmt(worst)};
}

Outcome bound_states() {
  const auto& b = shared.ref().bound_states_U();
  const double e0 = oracles::square_well_energies(4.0, 1.0).front();
  const double err = std::abs(b.front().energy - e0);
  int mismatches = 0;
  const std::vector<double> depths{1.0, 2.0, 4.0, 8.0, 15.0, 30.0, 45.0, 70.0, 100.0, 150.0};
  for (double d : depths) {
    const Potential U = PotentialSpec::square_well(d, 1.0);
    const auto g = radial::build_grid(25.0, 600, radial::QuadratureRule::GaussLegendre, U.breakpoints());
    if (static_cast<int>(radial::bound_states(U, g).size()) != oracles::square_well_count(d, 1.0)) ++mismatches;
  }
  return {err <= 1e-8 && mismatches == 0,
          "E0 error " + fmt(err) + ", count mismatches " + std::to_string(mismatches) + "/" + std::to_string(depths.size())};
}

Outcome barrier_length() {
  const ChannelModel m = reference_model(1.0, Potential::zero());
  const double a = core::effective_amplitude(m, 0.0).real();
  const double err = std::abs(a - oracles::barrier_amplitude(4.0, 1.0));
  return {err <= 1e-5, "a_eff " + fmt(a) + ", error " + fmt(err)};
}

Outcome block_inverse() {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n0 = 2 + t % 5, n1 = 2 + (t / 5) % 5, n = n0 + n1;
    CMat L(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) L(i, j) = cplx(nd(rng), nd(rng));
    L += 3.0 * std::sqrt(static_cast<double>(n)) * CMat::Identity(n, n);  // well conditioned
    const CMat R = blockcalc::schur_block_inverse(blockcalc::Block2x2::split(L, n0)).assemble();
    const CMat D = L.inverse();
    worst = std::max(worst, (R - D).norm() / D.norm());
  }
  blockcalc::Block2x2 s;
  s.L00 = CMat::Constant(1, 1, 2.0);
  s.L01 = CMat::Constant(1, 1, 1.0);
  s.L10 = CMat::Constant(1, 1, 1.0);
  s.L11 = CMat::Constant(1, 1, 3.0);
  const CMat inv = s.assemble().inverse();
  const double ok = (blockcalc::schur_block_inverse(s).assemble() - inv).norm() / inv.norm();
  const double swapped = (blockcalc::schur_block_inverse_swapped(s).assemble() - inv).norm() / inv.norm();
  return {worst <= 1e-10 && ok <= 1e-12 && swapped > 0.1,
          "max error " + fmt(worst) + "; scalar case " + fmt(ok) + ", swapped arrangement " + fmt(swapped)};
}

Outcome projector_algebra() {
  double worst = 0.0;
  int count = 0;
  std::vector<double> lambdas = shared.crit().lambdas;
  for (double lam : lambdas) {
    const ChannelModel m = shared.ref().with_lambda(lam);
    const CMat M = core::assemble_M(m, 0.0);
    const auto Q = blockcalc::riesz_projection(M);
    const CMat K = blockcalc::companion_K(M, Q);
    const auto n = M.rows();
    const CMat I = CMat::Identity(n, n);
    const CMat IQ = I - Q.Q;
    worst = std::max({worst, (Q.Q * Q.Q - Q.Q).norm() / Q.Q.norm(), (Q.Q * K).norm() / K.norm(),
                      (K * Q.Q).norm() / K.norm(), (K * (I - M) - IQ).norm() / IQ.norm()});
    ++count;
  }
  return {count >= 1 && worst <= 1e-8, std::to_string(count) + " critical value(s), max defect " + fmt(worst)};
}

Outcome resonance_existence() {
  const double l0 = shared.lambda0();
  const double e0 = std::abs(shared.E0());
  const Potential deep = PotentialSpec::square_well(30.0, 1.0);
  const ChannelModel fam2 = reference_model(1.0, kW, deep);
  const auto& b = fam2.bound_states_U();
  const auto ir = scan::interlacing_report(fam2, 0.05, 2.0 * std::abs(b.front().energy), 0.05, 0);
  std::string order;
  for (double x : ir.ordered) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8g", x);
    order += (order.empty() ? "" : " > ") + std::string(buf);
  }
  const bool two = b.size() == 2 && ir.ordered.size() >= 4;
  return {l0 > e0 && two && ir.holds,
          "lambda0 " + fmt(l0) + " > |E0| " + fmt(e0) + "; N=2 at eps 0.05: " + order};
}

Outcome pole_law() {
  const double l0 = shared.lambda0();
  const ChannelModel& fam = shared.ref();
  auto samples = [](const ChannelModel& f, double lj, std::vector<double>& ls, std::vector<double>& a) {
    ls = scan::pole_offsets(lj);
    a.clear();
    for (double l : ls) a.push_back(core::effective_amplitude(f.with_lambda(l), 0.0).real());
  };
  std::vector<double> ls, a;
  samples(fam, l0, ls, a);
  const auto f1 = scan::pole_fit(ls, a, l0, false, true);
  const bool first_ok = f1.residual < 0.05 && std::abs(f1.c) > f1.noise_floor;
  const ChannelModel sk = shared.second_kind_model();
  samples(sk, sk.lambda(), ls, a);
  const auto f2 = scan::pole_fit(ls, a, sk.lambda(), true, true);
  const bool second_ok = std::abs(f2.c) <= f2.noise_floor;
  return {first_ok && second_ok, "first kind c0 " + fmt(f1.c) + " residual " + fmt(f1.residual) + "; second kind |c| " +
                                     fmt(std::abs(f2.c)) + " noise floor " + fmt(f2.noise_floor) + " (tuning " +
                                     fmt(shared.tune_seconds) + " s)"};
}

Outcome field_law() {
  const double l0 = shared.lambda0();
  const auto fm = scan::field_map(shared.ref(), 1.0, 0.0, 1.2, 1.4, 41);
  const double rel = std::abs(fm.lambda_at_B0 - l0) / l0;
  return {fm.residual < 0.02 && rel <= 1e-6, "residual " + fmt(fm.residual) + ", lambda(B0) relative error " + fmt(rel)};
}

double check_value(const expand::ExpansionReport& r, const std::string& name) {
  for (const auto& c : r.coefficient_checks)
    if (c.name == name) return c.value;
  fail(ErrorKind::NotFound, "missing check " + name);
}

Outcome first_kind() {
  const ChannelModel m = shared.ref().with_lambda(shared.lambda0());
  const auto r = expand::verify_first_kind(m);
  const double res = r.residue_errors.back(), agree = check_value(r, "a_route_agreement");
  return {std::abs(r.order.slope + 1.0) <= 0.05 && res < 0.05 && agree <= 1e-4,
          "slope " + fmt(r.order.slope) + ", residue error " + fmt(res) + " at k " + fmt(r.k_sequence.back()) +
              ", route agreement " + fmt(agree)};
}

Outcome second_kind() {
  const ChannelModel m = shared.second_kind_model();
  const auto label = core::classify(m).label;
  const auto r = expand::verify_second_kind(m);
  const double minus = r.residue_errors.back(), plus = check_value(r, "leading_residue_plus_P0");
  const double gram = check_value(r, "gram_identity"), p0 = check_value(r, "P0_X_RV_identity");
  return {label == core::CaseLabel::SecondKind && std::abs(r.order.slope + 2.0) <= 0.1 && minus < 0.05 &&
              gram <= 1e-10 && p0 <= 1e-6,
          "slope " + fmt(r.order.slope) + ", ||k^2 C^-1 + P0|| " + fmt(minus) + " (with +P0: " + fmt(plus) +
              "), Gram " + fmt(gram) + ", P0 identity " + fmt(p0) + ", tuning " + fmt(shared.tune_seconds) + " s"};
}

Outcome isomorphism() {
  const ChannelModel m = shared.ref().with_lambda(shared.lambda0());
  auto sorted_nonzero = [](const Eigen::VectorXcd& ev) {
    std::vector<cplx> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i]) > 1e-8) out.push_back(ev[i]);
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    return out;
  };
  const auto em = sorted_nonzero(blockcalc::eigenvalues(core::assemble_M(m, 0.0)));
  const auto en = sorted_nonzero(blockcalc::eigenvalues(core::assemble_N(m, 0.0)));
  double spec = em.size() == en.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(em.size(), en.size()) && i < 20; ++i) spec = std::max(spec, std::abs(em[i] - en[i]));
  const auto ks = core::kernel_space(m);
  const auto db = core::dual_basis(m, ks.basis_M);
  double inv = 0.0;
  for (double x : db.inverse_residuals) inv = std::max(inv, x);
  // Discretization floor of C(0): the same residual for the exact zero-energy open-channel solution.
  const ChannelModel open = m.with_coupling(Potential::zero());
  const auto s0 = core::sandwich(open, 0.0, core::Sandwich::Detail::Solve);
  const auto& g = m.grid();
  auto wn = [&](const CVec& v) { return std::sqrt((g.weights().array() * v.array().abs2()).sum()); };
  const double floor = wn(core::apply_C(open, s0, open.psi())) / wn(g.second_derivative(open.psi()));
  const double c0 = ks.c0_residuals.empty() ? 1.0 : ks.c0_residuals.front();
  return {spec <= 1e-8 && !ks.basis_M.empty() && inv <= 1e-6 && c0 <= 10.0 * floor,
          "spectra " + fmt(spec) + ", R_V X on kernel " + fmt(inv) + ", C(0) residual " + fmt(c0) + " vs floor " + fmt(floor)};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("feshbach_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto cfg = cli::parse_config("[model]\nv = square_barrier 4 1\nu = square_well 4 1\nw = gaussian 4 1\n[scan]\npoints = 16\n");
  auto read = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  cli::run_scan(cfg, (dir / "a").string());
  cli::run_scan(cfg, (dir / "b").string());
  const std::string a = read(dir / "a.csv"), b = read(dir / "b.csv");
  std::filesystem::remove_all(dir);
  const auto rows = std::count(a.begin(), a.end(), '\n');
  return {!a.empty() && a == b, std::to_string(rows) + " lines, " + (a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"free-kernel oracle", free_kernels},
      {"bound-state oracle", bound_states},
      {"scattering oracle", barrier_length},
      {"block inverse", block_inverse},
      {"projector algebra", projector_algebra},
      {"resonance existence and interlacing", resonance_existence},
      {"pole law", pole_law},
      {"field map", field_law},
      {"first-kind expansion", first_kind},
      {"second-kind expansion", second_kind},
      {"isomorphism suite", isomorphism},
      {"scan determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2zu %-36s %s  %s  [%.1f s]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
