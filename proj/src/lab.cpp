#include "feshbach/lab.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "feshbach/blockcalc.hpp"
#include "feshbach/error.hpp"
#include "feshbach/oracles.hpp"
#include "feshbach/radial.hpp"

namespace feshbach::cli {

namespace {

using core::ChannelModel;
using core::Sandwich;

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

/// Human-readable report with a `key: value` section and the embedded configuration.
class Report {
 public:
  explicit Report(std::string title) { text_ = "# feshbach-lab " + std::move(title) + "\n"; }
  void line(const std::string& s) { text_ += s + "\n"; }
  void kv(const std::string& k, const std::string& v) { text_ += k + ": " + v + "\n"; }
  void kv(const std::string& k, double v) { kv(k, format_number(v)); }
  void kv(const std::string& k, const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + format_number(x);
    kv(k, s.empty() ? "none" : s);
  }
  void config(const RunConfig& cfg) {
    text_ += "\n--- config ---\n" + cfg.text;
    if (!cfg.text.empty() && cfg.text.back() != '\n') text_ += "\n";
    text_ += "--- end config ---\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  f << content;
  if (!f) fail(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

double lambda_max(const RunConfig& cfg, const ChannelModel& fam) {
  return cfg.sweep.max ? *cfg.sweep.max : 4.0 * std::abs(fam.bound_states_U().front().energy);
}

double require_lambda(const RunConfig& cfg, const char* command) {
  if (!cfg.lambda) fail(ErrorKind::Config, std::string(command) + " needs a fixed lambda ([model] lambda = ...)");
  return *cfg.lambda;
}

std::string complex_str(cplx z) { return format_number(z.real()) + (z.imag() < 0 ? " - " : " + ") + format_number(std::abs(z.imag())) + "i"; }

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_row(const ScanRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("POLE"); };
  return format_number(r.lambda) + "," + opt(r.a_eff) + "," + opt(r.sigma_min) + "," + opt(r.mu_max) + "," +
         r.case_label + "," + sanitize(r.notes);
}

core::ChannelModel build_model(const RunConfig& cfg, double lambda) {
  const auto grid = core::model_grid(cfg.V, cfg.U, cfg.W, cfg.grid.r_max, cfg.grid.n, cfg.grid.rule);
  return ChannelModel(cfg.V, cfg.U, cfg.W, lambda, grid);
}

core::ChannelModel build_family(const RunConfig& cfg) {
  const double l0 = cfg.lambda.value_or(cfg.sweep.min);
  try {
    return build_model(cfg, l0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AtEigenvalue) throw;
    return build_model(cfg, l0 * (1.0 + 1e-3));
  }
}

ScanRow scan_row(const ChannelModel& family, double lambda, const RunConfig& cfg, const std::vector<double>& criticals) {
  ScanRow row;
  row.lambda = lambda;
  try {
    const ChannelModel m = family.with_lambda(lambda);
    const Sandwich s = core::sandwich(m, 0.0, Sandwich::Detail::Solve);
    row.sigma_min = core::sigma_min(m, s);
    const Eigen::VectorXcd ev = blockcalc::eigenvalues(s.Mss);
    double mu = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mu = i == 0 ? ev[i].real() : std::max(mu, ev[i].real());
    row.mu_max = mu;
    bool pole = *row.sigma_min <= 1e-8;
    for (double c : criticals)
      if (std::abs(lambda - c) <= 1e-6 * c) pole = true;
    if (*row.sigma_min < 1e-6) row.case_label = std::string(core::to_string(core::classify(m).label));
    if (pole) {
      row.notes = "within 1e-6 of a critical value";
      return row;
    }
    row.a_eff = core::effective_amplitude(m, s).real();
    if (cfg.richardson_terms >= 2) {
      const auto sl = scan::effective_scattering_length(m, cfg.k0, cfg.richardson_terms);
      if (!sl.ks.empty())
        row.notes = "extrapolated=" + format_number(sl.richardson) + " err=" + fmt_short(sl.error_estimate) +
                    (sl.converged ? "" : " not-converged");
      else
        row.notes = "k0^2 above lambda: no extrapolation";
    }
  } catch (const Error& e) {
    row.notes = sanitize(e.what());
  }
  return row;
}

RunResult run_scan(const RunConfig& cfg, const std::string& prefix) {
  const ChannelModel fam = build_family(cfg);
  const double hi = lambda_max(cfg, fam);
  if (!(hi > cfg.sweep.min)) fail(ErrorKind::Config, "sweep requires min < max");
  const auto lambdas = scan::geometric_lambdas(fam, cfg.sweep.min, hi, cfg.sweep.points);
  Report rep("scan report");
  std::vector<double> crit;
  scan::ResonanceReport rr;
  std::string rr_error;
  try {
    rr = scan::resonance_report(fam, cfg.sweep.min, hi);
    crit = rr.critical_lambdas;
  } catch (const Error& e) {
    rr_error = e.what();
  }
  std::string csv = std::string(kCsvHeader) + "\n";
  for (double l : lambdas) csv += format_row(scan_row(fam, l, cfg, crit)) + "\n";
  RunResult res;
  write_file(prefix + ".csv", csv);
  res.files.push_back(prefix + ".csv");
  rep.kv("lambda_min", cfg.sweep.min);
  rep.kv("lambda_max", hi);
  rep.kv("points", static_cast<double>(lambdas.size()));
  std::vector<double> energies;
  for (const auto& b : fam.bound_states_U()) energies.push_back(b.energy);
  rep.kv("bound_energies", energies);
  rep.kv("a_v0", fam.a_v0());
  if (!rr_error.empty()) rep.kv("resonance_report_error", rr_error);
  rep.kv("critical_lambdas", rr.critical_lambdas);
  rep.kv("pole_strengths", rr.pole_strengths);
  rep.kv("fit_residuals", rr.fit_residuals);
  rep.kv("sigma_min", rr.sigma_min);
  std::string labels;
  for (auto l : rr.case_labels) labels += (labels.empty() ? "" : " ") + std::string(core::to_string(l));
  rep.kv("case_labels", labels.empty() ? "none" : labels);
  rep.kv("interlacing_ok", rr.interlacing_ok ? "true" : "false");
  rep.config(cfg);
  write_file(prefix + "_scan.txt", rep.text());
  res.files.push_back(prefix + "_scan.txt");
  res.summary = std::to_string(rr.critical_lambdas.size()) + " critical value(s); " + std::to_string(lambdas.size()) + " rows";
  return res;
}

RunResult run_classify(const RunConfig& cfg, const std::string& prefix) {
  const ChannelModel m = build_model(cfg, require_lambda(cfg, "classify"));
  const auto ks = core::kernel_space(m);
  const auto cl = core::classify(ks);
  Report rep("classify report");
  rep.kv("lambda", m.lambda());
  rep.kv("sigma_min", ks.sigma_min);
  rep.kv("dim_M", static_cast<double>(ks.dim_M));
  rep.kv("dim_ME", static_cast<double>(ks.dim_ME));
  std::string betas;
  for (const auto& b : ks.beta) betas += (betas.empty() ? "" : " ") + complex_str(b);
  rep.kv("beta", betas.empty() ? "none" : betas);
  rep.kv("beta_tol", ks.beta_tol);
  rep.kv("case", std::string(core::to_string(cl.label)));
  rep.kv("kernel_residuals", ks.kernel_residuals);
  rep.kv("c0_residuals", ks.c0_residuals);
  if (ks.dim_M > 0) {
    const auto st = core::zero_energy_state(m, ks.basis_M.front());
    rep.kv("zero_energy_residual", core::zero_energy_residual(m, st));
    rep.kv("closed_tail_slope", core::closed_tail_slope(m, st, 5.0, 10.0));
    const auto db = core::dual_basis(m, ks.basis_M);
    rep.kv("dual_n_residuals", db.n_residuals);
    rep.kv("dual_inverse_residuals", db.inverse_residuals);
  }
  rep.config(cfg);
  RunResult res;
  write_file(prefix + "_classify.txt", rep.text());
  res.files.push_back(prefix + "_classify.txt");
  res.summary = std::string(core::to_string(cl.label)) + " at lambda = " + format_number(m.lambda());
  return res;
}

RunResult run_expand(const RunConfig& cfg, const std::string& prefix) {
  const ChannelModel m = build_model(cfg, require_lambda(cfg, "expand"));
  const auto ks_seq = expand::default_k_sequence(cfg.k0, cfg.k_count);
  const auto label = core::classify(m).label;
  expand::ExpansionReport er;
  switch (label) {
    case core::CaseLabel::Generic: er = expand::verify_generic(m, ks_seq); break;
    case core::CaseLabel::FirstKind: er = expand::verify_first_kind(m, ks_seq); break;
    case core::CaseLabel::SecondKind: er = expand::verify_second_kind(m, ks_seq); break;
    case core::CaseLabel::ThirdKind:
      fail(ErrorKind::ExpansionMismatch, "third-kind expansions are not covered");
  }
  Report rep("expansion report");
  rep.kv("case", std::string(core::to_string(er.case_label)));
  rep.kv("lambda", er.lambda);
  rep.kv("s", er.s);
  rep.kv("s_prime", er.s_prime);
  rep.kv("k_sequence", er.k_sequence);
  rep.kv("weighted_norms", er.weighted_norms);
  rep.kv("expected_order", er.expected_order);
  rep.kv("estimated_order", er.order.slope);
  rep.kv("order_ci", std::vector<double>{er.order.ci_low, er.order.ci_high});
  rep.kv("tail_slope", er.order.tail_slope);
  rep.kv("order_reliable", er.order.reliable ? "true" : "false");
  if (!er.residue_errors.empty()) rep.kv("residue_errors", er.residue_errors);
  if (!er.second_singular.empty()) rep.kv("second_singular_ratio", er.second_singular);
  if (!er.next_order_errors.empty()) rep.kv("next_order_errors", er.next_order_errors);
  for (const auto& c : er.coefficient_checks) {
    if (c.informational)
      rep.kv("note." + c.name, format_number(c.value));
    else
      rep.kv("check." + c.name, format_number(c.value) + " tol " + format_number(c.tolerance) + (c.pass ? " pass" : " FAIL"));
  }
  rep.kv("tolerances_met", er.tolerances_met ? "true" : "false");
  rep.config(cfg);
  RunResult res;
  write_file(prefix + "_expand.txt", rep.text());
  res.files.push_back(prefix + "_expand.txt");
  res.exit_code = er.tolerances_met ? 0 : 2;
  res.summary = std::string(core::to_string(er.case_label)) + ": estimated order " + format_number(er.order.slope) +
                (er.tolerances_met ? " (all checks pass)" : " (check failures)");
  return res;
}

RunResult run_field(const RunConfig& cfg, const std::string& prefix) {
  if (!cfg.field) fail(ErrorKind::Config, "field needs a [field] section");
  const auto& f = *cfg.field;
  const ChannelModel fam = build_family(cfg);
  const auto fm = scan::field_map(fam, f.slope, f.offset, f.B_min, f.B_max, f.samples);
  Report rep("field report");
  rep.kv("slope", fm.slope);
  rep.kv("offset", fm.offset);
  rep.kv("B0", fm.B0);
  rep.kv("Delta", fm.Delta);
  rep.kv("a_bg", fm.a_bg);
  rep.kv("lambda_critical", fm.lambda_j);
  rep.kv("lambda_at_B0", fm.lambda_at_B0);
  rep.kv("lambda_relative_error", std::abs(fm.lambda_at_B0 - fm.lambda_j) / fm.lambda_j);
  rep.kv("fit_residual", fm.residual);
  rep.config(cfg);
  std::string csv = "B,lambda,a_eff\n";
  for (std::size_t i = 0; i < fm.B.size(); ++i)
    csv += format_number(fm.B[i]) + "," + format_number(fm.offset + fm.slope * fm.B[i]) + "," + format_number(fm.a[i]) + "\n";
  RunResult res;
  write_file(prefix + "_field.txt", rep.text());
  write_file(prefix + "_field.csv", csv);
  res.files = {prefix + "_field.txt", prefix + "_field.csv"};
  res.summary = "B0 = " + format_number(fm.B0) + ", Delta = " + format_number(fm.Delta) + ", a_bg = " + format_number(fm.a_bg);
  return res;
}

RunResult run_selftest(const SelftestOptions& opt, std::ostream& log) {
  using radial::Potential;
  using radial::PotentialSpec;
  struct Suite {
    std::string name;
    int passed = 0;
    int total = 0;
    void expect(bool ok) {
      ++total;
      if (ok) ++passed;
    }
  };
  std::vector<Suite> suites;
  auto run = [&](const std::string& name, const std::function<void(Suite&)>& body) {
    Suite s{name};
    try {
      body(s);
    } catch (const std::exception& e) {
      s.expect(false);
      log << "  " << name << ": exception: " << e.what() << "\n";
    }
    log << "suite " << s.name << ": " << s.passed << "/" << s.total << " passed\n";
    suites.push_back(s);
  };

  const auto free_grid = radial::build_grid(25.0, 600, radial::QuadratureRule::GaussLegendre);
  run("free_kernels", [&](Suite& s) {
    const Vec& r = free_grid.nodes();
    for (double k : {0.1, 0.5, 1.0}) {
      const auto G = radial::greens_kernel_k(Potential::zero(), k, free_grid);
      double err = 0.0;
      for (Eigen::Index i = 0; i < r.size(); i += 7)
        for (Eigen::Index j = 0; j < r.size(); j += 7) err = std::max(err, std::abs(G.kernel(i, j) - oracles::free_kernel(k, r[i], r[j])));
      s.expect(err <= 1e-8);
    }
    for (double kappa : {0.5, 1.0}) {
      const auto G = radial::greens_kernel(Potential::zero(), -kappa * kappa, free_grid);
      double err = 0.0;
      for (Eigen::Index i = 0; i < r.size(); i += 7)
        for (Eigen::Index j = 0; j < r.size(); j += 7)
          err = std::max(err, std::abs(G.kernel(i, j) - oracles::free_decaying_kernel(kappa, r[i], r[j])));
      s.expect(err <= 1e-8);
    }
  });

  run("wronskian_constancy", [&](Suite& s) {
    const Potential barrier = PotentialSpec::square_barrier(4.0, 1.0);
    const std::vector<double> bp{1.0};
    const auto g = radial::build_grid(25.0, 600, radial::QuadratureRule::GaussLegendre, bp);
    for (cplx z : {cplx{0.25, 0.0}, cplx{1.0, 0.0}, cplx{-0.5, 0.0}}) {
      const auto u = radial::regular_solution(barrier, z, g);
      auto w = radial::outgoing_solution(barrier, z, g);
      if (opt.corrupt_wronskian)
        for (Eigen::Index i = w.derivative.size() / 2; i < w.derivative.size(); ++i) w.derivative[i] *= 1.0 + 1e-4;
      s.expect(radial::wronskian_spread(u, w) <= 1e-8);
    }
  });

  run("square_well_bound_states", [&](Suite& s) {
    const std::vector<double> bp{1.0};
    const auto g = radial::build_grid(25.0, 600, radial::QuadratureRule::GaussLegendre, bp);
    const auto bs = radial::bound_states(PotentialSpec::square_well(4.0, 1.0), g);
    const auto ref = oracles::square_well_energies(4.0, 1.0);
    s.expect(bs.size() == ref.size() && !bs.empty() && std::abs(bs[0].energy - ref[0]) <= 1e-8);
    for (double depth : {1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 40.0, 60.0, 80.0})
      s.expect(static_cast<int>(radial::bound_states(PotentialSpec::square_well(depth, 1.0), g).size()) ==
               oracles::square_well_count(depth, 1.0));
  });

  run("schur_block_inverse", [&](Suite& s) {
    blockcalc::Block2x2 L;
    L.L00 = CMat::Constant(1, 1, 2.0);
    L.L01 = CMat::Constant(1, 1, 1.0);
    L.L10 = CMat::Constant(1, 1, 1.0);
    L.L11 = CMat::Constant(1, 1, 1.0);
    const CMat inv = blockcalc::schur_block_inverse(L).assemble();
    CMat ref(2, 2);
    ref << 1.0, -1.0, -1.0, 2.0;
    s.expect((inv - ref).cwiseAbs().maxCoeff() <= 1e-14);
    const CMat swapped = blockcalc::schur_block_inverse_swapped(L).assemble();
    s.expect((swapped - ref).cwiseAbs().maxCoeff() > 0.5);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 10; ++t) {
      CMat A(8, 8);
      for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j) A(i, j) = cplx{nd(rng), nd(rng)};
      A += 8.0 * CMat::Identity(8, 8);
      const CMat B = blockcalc::schur_block_inverse(blockcalc::Block2x2::split(A, 3)).assemble();
      s.expect((B - A.inverse()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  });

  run("riesz_projection", [&](Suite& s) {
    CMat M = CMat::Zero(2, 2);
    M(0, 0) = 1.0;
    M(1, 1) = 0.2;
    const auto Q = blockcalc::riesz_projection(M);
    CMat Qref = CMat::Zero(2, 2);
    Qref(0, 0) = 1.0;
    s.expect((Q.Q - Qref).cwiseAbs().maxCoeff() <= 1e-10);
    s.expect(Q.rank == 1);
    const CMat K = blockcalc::companion_K(M, Q);
    CMat Kref = CMat::Zero(2, 2);
    Kref(1, 1) = 1.25;
    s.expect((K - Kref).cwiseAbs().maxCoeff() <= 1e-10);
  });

  run("pole_fit", [&](Suite& s) {
    std::vector<double> ls, as;
    for (double l : scan::pole_offsets(2.0)) {
      ls.push_back(l);
      as.push_back(3.0 / (l - 2.0) + 0.7);
    }
    const auto f = scan::pole_fit(ls, as, 2.0);
    s.expect(std::abs(f.c - 3.0) <= 1e-10);
    s.expect(std::abs(f.b - 0.7) <= 1e-10);
  });

  run("order_estimate", [&](Suite& s) {
    const auto ks = expand::default_k_sequence();
    std::vector<double> inv, cst;
    for (double k : ks) {
      inv.push_back(1.0 / k);
      cst.push_back(2.0);
    }
    s.expect(std::abs(expand::singular_order_estimate(ks, inv, opt.seed).slope + 1.0) <= 1e-3);
    s.expect(std::abs(expand::singular_order_estimate(ks, cst, opt.seed).slope) <= 1e-3);
  });

  RunResult res;
  int failed = 0;
  for (const auto& s : suites)
    if (s.passed != s.total) ++failed;
  res.exit_code = failed == 0 ? 0 : 1;
  res.summary = failed == 0 ? "all suites pass" : std::to_string(failed) + " suite(s) failed";
  log << res.summary << "\n";
  return res;
}

}  // namespace feshbach::cli
