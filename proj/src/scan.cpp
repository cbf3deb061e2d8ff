#include "feshbach/scan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "feshbach/error.hpp"
#include "feshbach/roots.hpp"

namespace feshbach::scan {

namespace {

using Index = Eigen::Index;
using core::Sandwich;

std::vector<double> poles(const ChannelModel& family) {
  std::vector<double> p;
  for (const auto& b : family.bound_states_U()) p.push_back(-b.energy);
  std::sort(p.begin(), p.end());
  return p;
}

bool near_pole(const ChannelModel& family, double lambda, double rel) {
  for (double p : poles(family))
    if (std::abs(lambda - p) <= rel * p) return true;
  return false;
}

int count_above_one(const ChannelModel& family, double lambda) {
  const auto m = family.with_lambda(lambda);
  const Sandwich s = core::sandwich(m, 0.0, Sandwich::Detail::Spectrum);
  const Eigen::VectorXcd ev = blockcalc::eigenvalues(s.Mss);
  int c = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i].real() > 1.0) ++c;
  return c;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

std::vector<double> mu_values(const ChannelModel& model) {
  const Sandwich s = core::sandwich(model, 0.0, Sandwich::Detail::Spectrum);
  const Eigen::VectorXcd ev = blockcalc::eigenvalues(s.Mss);
  std::vector<double> mu(static_cast<std::size_t>(ev.size()));
  for (Index i = 0; i < ev.size(); ++i) mu[static_cast<std::size_t>(i)] = ev[i].real();
  std::sort(mu.begin(), mu.end(), std::greater<>());
  return mu;
}

EigenTrace eigen_trace(const ChannelModel& family, const std::vector<double>& lambdas, int n_tracks) {
  require(n_tracks >= 1, "n_tracks must be positive");
  EigenTrace tr;
  tr.lambdas = lambdas;
  const auto nl = static_cast<Index>(lambdas.size());
  tr.mu = Mat::Zero(nl, n_tracks);
  const auto m = static_cast<Index>(family.support().size());
  if (m == 0) {
    tr.overlaps.assign(lambdas.size(), 1.0);
    return tr;
  }
  const Index nt = std::min<Index>(n_tracks, m);
  Mat prev;  // columns: unit eigenvectors of the tracked curves
  for (Index li = 0; li < nl; ++li) {
    const auto model = family.with_lambda(lambdas[static_cast<std::size_t>(li)]);
    const Sandwich s = core::sandwich(model, 0.0, Sandwich::Detail::Spectrum);
    Eigen::EigenSolver<Mat> es(s.Mss.real());
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericFailure, "eigensolver failed in eigen_trace");
    const Eigen::VectorXcd ev = es.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return ev[a].real() > ev[b].real(); });
    // Candidates: twice as many as tracked, so that curves can swap order.
    const Index nc = std::min<Index>(2 * nt, m);
    Mat cand(m, nc);
    Vec cand_mu(nc);
    for (Index c = 0; c < nc; ++c) {
      const Index j = order[static_cast<std::size_t>(c)];
      Vec v = es.eigenvectors().col(j).real();
      if (v.norm() < 1e-8) v = es.eigenvectors().col(j).imag();
      cand.col(c) = v.normalized();
      cand_mu[c] = ev[j].real();
    }
    if (li == 0) {
      prev = cand.leftCols(nt);
      for (Index t = 0; t < nt; ++t) tr.mu(li, t) = cand_mu[t];
      tr.overlaps.push_back(1.0);
      continue;
    }
    const Mat ov = (prev.transpose() * cand).cwiseAbs();
    std::vector<char> used(static_cast<std::size_t>(nc), 0);
    double worst = 1.0;
    Mat next(m, nt);
    for (Index t = 0; t < nt; ++t) {
      Index best = -1;
      double bo = -1.0;
      for (Index c = 0; c < nc; ++c)
        if (!used[static_cast<std::size_t>(c)] && ov(t, c) > bo) {
          bo = ov(t, c);
          best = c;
        }
      used[static_cast<std::size_t>(best)] = 1;
      worst = std::min(worst, bo);
      tr.mu(li, t) = cand_mu[best];
      next.col(t) = cand.col(best);
    }
    prev = next;
    tr.overlaps.push_back(worst);
    if (worst < 0.5) tr.ambiguous = true;
  }
  return tr;
}

std::vector<double> geometric_lambdas(const ChannelModel& family, double lo, double hi, int points) {
  require(lo > 0.0 && hi > lo, "lambda range must satisfy 0 < min < max");
  require(points >= 2, "a sweep needs at least two points");
  std::vector<double> out;
  const double q = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    double l = lo * std::exp(q * i);
    for (double p : poles(family))
      if (std::abs(l - p) <= 1e-6 * p) l = p * (1.0 + 1e-6);
    out.push_back(l);
  }
  return out;
}

namespace {

CriticalValues critical_values_tol(const ChannelModel& family, double lo, double hi, double rel_tol) {
  require(lo > 0.0 && hi > lo, "lambda range must satisfy 0 < min < max");
  CriticalValues out;
  if (family.support().empty()) return out;
  // Split at the poles |E_j|; eigenvalues of M(0) may enter or leave through infinity there.
  std::vector<double> edges{lo};
  for (double p : poles(family))
    if (p > lo && p < hi) edges.push_back(p);
  edges.push_back(hi);
  constexpr double kGap = 1e-7;
  std::vector<double> roots;
  std::function<void(double, int, double, int)> isolate = [&](double a, int ca, double b, int cb) {
    if (ca == cb) return;
    if (std::abs(ca - cb) == 1) {
      while (b - a > rel_tol * b) {
        const double mid = 0.5 * (a + b);
        const int cm = count_above_one(family, mid);
        if (cm == ca)
          a = mid;
        else if (cm == cb)
          b = mid;
        else {
          isolate(a, ca, mid, cm);
          isolate(mid, cm, b, cb);
          return;
        }
      }
      roots.push_back(0.5 * (a + b));
      return;
    }
    if (b - a <= rel_tol * b) {
      // Several curves cross 1 at numerically the same lambda.
      for (int i = 0; i < std::abs(ca - cb); ++i) roots.push_back(0.5 * (a + b));
      return;
    }
    const double mid = 0.5 * (a + b);
    const int cm = count_above_one(family, mid);
    isolate(a, ca, mid, cm);
    isolate(mid, cm, b, cb);
  };
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = e == 0 ? edges[e] : edges[e] * (1.0 + kGap);
    const double b = e + 2 == edges.size() ? edges[e + 1] : edges[e + 1] * (1.0 - kGap);
    if (!(b > a)) continue;
    // Coarse samples so that pairs of crossings inside one interval are not missed.
    constexpr int kSamples = 8;
    std::vector<double> xs;
    std::vector<int> cs;
    for (int i = 0; i <= kSamples; ++i) {
      const double x = a * std::pow(b / a, static_cast<double>(i) / kSamples);
      xs.push_back(x);
      cs.push_back(count_above_one(family, x));
    }
    for (int i = 0; i < kSamples; ++i) isolate(xs[i], cs[i], xs[i + 1], cs[i + 1]);
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    const auto m = family.with_lambda(r);
    const double sig = core::sigma_min(m, core::sandwich(m, 0.0, Sandwich::Detail::Solve));
    if (sig < 1e-6) {
      out.lambdas.push_back(r);
      out.sigma_min.push_back(sig);
    } else {
      out.spurious.push_back(r);
    }
  }
  return out;
}

}  // namespace

CriticalValues critical_values(const ChannelModel& family, double lo, double hi) {
  return critical_values_tol(family, lo, hi, 1e-12);
}

ScatteringLength effective_scattering_length(const ChannelModel& model, double k0, int terms,
                                             const std::vector<double>& criticals) {
  for (double c : criticals)
    if (std::abs(model.lambda() - c) <= 1e-6 * c)
      fail(ErrorKind::NearResonance, "lambda = " + fmt(model.lambda()) + " lies within 1e-6 of the pole at " + fmt(c));
  ScatteringLength out;
  out.value = core::effective_amplitude(model, 0.0).real();
  out.richardson = out.value;
  if (terms < 2 || k0 * k0 >= model.lambda()) return out;
  // Neville table in k with ratio 2: T[m][j] removes the terms k^1 .. k^j.
  std::vector<std::vector<double>> T;
  for (int m = 0; m < terms; ++m) {
    const double k = k0 * std::ldexp(1.0, -m);
    const cplx a = core::effective_amplitude(model, k);
    out.ks.push_back(k);
    out.amplitudes.push_back(a);
    std::vector<double> row{a.real()};
    for (int j = 1; j <= m; ++j) {
      const double f = std::ldexp(1.0, j) - 1.0;
      row.push_back(row[j - 1] + (row[j - 1] - T[m - 1][j - 1]) / f);
    }
    T.push_back(std::move(row));
  }
  const auto& last = T.back();
  out.richardson = last.back();
  out.error_estimate = std::abs(last.back() - last[last.size() - 2]);
  out.converged = std::abs(out.richardson - out.value) <= std::max(10.0 * out.error_estimate, 1e-6 * std::abs(out.value));
  return out;
}

PoleFit pole_fit(const std::vector<double>& lambdas, const std::vector<double>& a, double lambda_j, bool quadratic,
                 bool allow_unreliable) {
  require(lambdas.size() == a.size(), "pole_fit needs matching sample arrays");
  int below = 0, above = 0;
  for (double l : lambdas) {
    if (std::abs(l - lambda_j) < 1e-6 * std::abs(lambda_j))
      fail(ErrorKind::InvalidArgument, "pole_fit sample lies within 1e-6 of the pole");
    (l < lambda_j ? below : above)++;
  }
  require(below >= 6 && above >= 6, "pole_fit needs at least six samples on each side of the pole");
  const auto n = static_cast<Index>(lambdas.size());
  const Index p = quadratic ? 3 : 2;
  Mat A(n, p);
  Vec y(n);
  double amax = 0.0, dmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double d = lambdas[static_cast<std::size_t>(i)] - lambda_j;
    A(i, 0) = 1.0;
    A(i, 1) = d;
    if (quadratic) A(i, 2) = d * d;
    y[i] = a[static_cast<std::size_t>(i)] * d;
    amax = std::max(amax, std::abs(a[static_cast<std::size_t>(i)]));
    dmax = std::max(dmax, std::abs(d));
  }
  // Column scaling keeps the normal equations well conditioned.
  Vec sc = A.colwise().norm().transpose();
  const Vec x = (A * sc.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(y).cwiseQuotient(sc);
  PoleFit f;
  f.c = x[0];
  f.b = x[1];
  f.q = quadratic ? x[2] : 0.0;
  f.abs_residual = (A * x - y).cwiseAbs().maxCoeff();
  f.residual = f.c != 0.0 ? f.abs_residual / std::abs(f.c) : std::numeric_limits<double>::infinity();
  f.noise_floor = 1e-6 * amax * dmax;
  f.reliable = f.residual <= 0.05;
  if (!f.reliable && !allow_unreliable)
    fail(ErrorKind::FitUnreliable, "pole fit residual " + fmt(f.residual) + " exceeds 5% of |c| = " + fmt(std::abs(f.c)));
  return f;
}

std::vector<double> pole_offsets(double lambda_j, double lo, double hi, int per_side) {
  require(lo > 0.0 && hi > lo && per_side >= 2, "invalid pole offset range");
  std::vector<double> out;
  for (int i = 0; i < per_side; ++i) {
    const double d = lo * std::pow(hi / lo, static_cast<double>(i) / (per_side - 1));
    out.push_back(lambda_j - d);
    out.push_back(lambda_j + d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool interlaces(const std::vector<double>& criticals, const std::vector<double>& bound_energies) {
  std::vector<double> c = criticals, e;
  for (double E : bound_energies) e.push_back(std::abs(E));
  std::sort(c.begin(), c.end(), std::greater<>());
  std::sort(e.begin(), e.end(), std::greater<>());
  const std::size_t N = e.size();
  if (N == 0 || c.size() < N) return false;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (!(c[j] > 0.0)) return false;
    if (j < N && !(c[j] > e[j])) return false;
    if (j >= 1 && !(c[j] < e[std::min(j - 1, N - 1)])) return false;
  }
  return true;
}

ResonanceReport resonance_report(const ChannelModel& family, double lo, double hi) {
  ResonanceReport rep;
  for (const auto& b : family.bound_states_U()) rep.bound_energies.push_back(b.energy);
  const CriticalValues cv = critical_values(family, lo, hi);
  std::vector<double> lam = cv.lambdas;
  std::vector<double> sig = cv.sigma_min;
  // Descending order.
  std::reverse(lam.begin(), lam.end());
  std::reverse(sig.begin(), sig.end());
  rep.critical_lambdas = lam;
  rep.sigma_min = sig;
  const auto ps = poles(family);
  for (std::size_t j = 0; j < lam.size(); ++j) {
    const double lj = lam[j];
    // Keep the window clear of the other poles of a_eff and of the closed-channel energies.
    double room = std::numeric_limits<double>::infinity();
    for (double p : ps) room = std::min(room, std::abs(p - lj));
    for (std::size_t i = 0; i < lam.size(); ++i)
      if (i != j) room = std::min(room, std::abs(lam[i] - lj));
    room = std::min(room, lj);
    const double hi_off = std::min(1e-2, 0.5 * room);
    const double lo_off = std::min(1e-4, 1e-2 * hi_off);
    std::vector<double> ls, as;
    for (double l : pole_offsets(lj, lo_off, hi_off)) {
      ls.push_back(l);
      as.push_back(core::effective_amplitude(family.with_lambda(l), 0.0).real());
    }
    const auto model_j = family.with_lambda(lj);
    CaseLabel label = CaseLabel::Generic;
    try {
      label = core::classify(model_j).label;
    } catch (const Error&) {
      label = CaseLabel::Generic;
    }
    rep.case_labels.push_back(label);
    const PoleFit f = pole_fit(ls, as, lj, label == CaseLabel::SecondKind, true);
    rep.pole_strengths.push_back(f.c);
    rep.fit_residuals.push_back(f.residual);
  }
  rep.interlacing_ok = interlaces(lam, rep.bound_energies);
  return rep;
}

InterlacingReport interlacing_report(const ChannelModel& family, double eps, double lambda_max, double eps_max,
                                     int bisections) {
  require(eps > 0.0 && eps_max >= eps, "coupling scales must satisfy 0 < eps <= eps_max");
  std::vector<double> E;
  for (const auto& b : family.bound_states_U()) E.push_back(b.energy);
  const double lo = std::min(0.02, 0.5 * std::abs(E.back()));
  auto run = [&](double e, std::vector<double>* crit) {
    const auto m = family.with_coupling(family.W().scaled(e));
    const auto cv = critical_values_tol(m, lo, lambda_max, crit ? 1e-12 : 1e-6);
    if (crit) *crit = cv.lambdas;
    return interlaces(cv.lambdas, E);
  };
  InterlacingReport rep;
  std::vector<double> crit;
  rep.holds = run(eps, &crit);
  std::sort(crit.begin(), crit.end(), std::greater<>());
  for (std::size_t j = 0; j < std::max(crit.size(), E.size()); ++j) {
    if (j < crit.size()) rep.ordered.push_back(crit[j]);
    if (j < E.size()) rep.ordered.push_back(std::abs(E[j]));
  }
  if (!rep.holds) return rep;
  rep.largest_eps = eps;
  if (eps_max > eps && run(eps_max, nullptr)) {
    rep.largest_eps = eps_max;
    return rep;
  }
  double a = eps, b = eps_max;
  for (int i = 0; i < bisections && eps_max > eps; ++i) {
    const double mid = std::sqrt(a * b);
    (run(mid, nullptr) ? a : b) = mid;
  }
  rep.largest_eps = a;
  return rep;
}

FieldMap fit_field_law(const std::vector<double>& B, const std::vector<double>& a, double B0_lo, double B0_hi) {
  require(B.size() == a.size() && B.size() >= 4, "field fit needs at least four samples");
  const auto n = static_cast<Index>(B.size());
  std::vector<double> sorted_abs;
  for (double x : a) sorted_abs.push_back(std::abs(x));
  std::nth_element(sorted_abs.begin(), sorted_abs.begin() + n / 2, sorted_abs.end());
  const double scale = sorted_abs[static_cast<std::size_t>(n / 2)];
  Vec wt(n);
  for (Index i = 0; i < n; ++i) wt[i] = 1.0 / (std::abs(a[static_cast<std::size_t>(i)]) + scale);
  // For fixed B0 the law a = p + q / (B - B0) is linear in (p, q).
  auto linear = [&](double B0, Vec& pq) {
    Mat A(n, 2);
    Vec y(n);
    for (Index i = 0; i < n; ++i) {
      A(i, 0) = wt[i];
      A(i, 1) = wt[i] / (B[static_cast<std::size_t>(i)] - B0);
      y[i] = wt[i] * a[static_cast<std::size_t>(i)];
    }
    pq = A.colPivHouseholderQr().solve(y);
    return (A * pq - y).squaredNorm();
  };
  Vec pq;
  // The objective has a pole at every sample, so minimize separately between samples.
  std::vector<double> edges{B0_lo};
  for (double b : B)
    if (b > B0_lo && b < B0_hi) edges.push_back(b);
  edges.push_back(B0_hi);
  std::sort(edges.begin(), edges.end());
  std::pair<double, double> best{0.5 * (B0_lo + B0_hi), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double margin = 1e-9 * (edges[i + 1] - edges[i]);
    if (!(edges[i + 1] - edges[i] > 0.0)) continue;
    const auto cand = minimize([&](double B0) { return linear(B0, pq); }, edges[i] + margin, edges[i + 1] - margin, 26);
    if (cand.second < best.second) best = cand;
  }
  linear(best.first, pq);
  FieldMap fm;
  fm.B0 = best.first;
  fm.a_bg = pq[0];
  fm.Delta = -pq[1] / pq[0];
  fm.B = B;
  fm.a = a;
  for (Index i = 0; i < n; ++i) {
    const double fit = pq[0] + pq[1] / (B[static_cast<std::size_t>(i)] - fm.B0);
    const double ai = a[static_cast<std::size_t>(i)];
    fm.residual = std::max(fm.residual, std::abs(fit - ai) / (std::abs(ai) + std::abs(fm.a_bg)));
  }
  return fm;
}

FieldMap field_map(const ChannelModel& family, double slope, double offset, double B_min, double B_max, int samples) {
  require(B_max > B_min, "field range must satisfy B_min < B_max");
  require(slope != 0.0, "field slope must be nonzero");
  require(samples >= 8, "field map needs at least eight samples");
  const double l1 = offset + slope * B_min, l2 = offset + slope * B_max;
  const double lo = std::min(l1, l2), hi = std::max(l1, l2);
  if (!(lo > 0.0)) fail(ErrorKind::InvalidRange, "lambda(B) must stay positive over the field range");
  const CriticalValues cv = critical_values(family, lo, hi);
  if (cv.lambdas.size() != 1)
    fail(ErrorKind::InvalidRange, "field range crosses " + std::to_string(cv.lambdas.size()) +
                                      " critical values (exactly one required)");
  const double lj = cv.lambdas.front();
  const double Bj = (lj - offset) / slope;
  // Uniform samples plus geometric clusters on both sides of the resonance.
  std::vector<double> Bs;
  for (int i = 0; i < samples; ++i) Bs.push_back(B_min + (B_max - B_min) * i / (samples - 1));
  const double room = std::min(Bj - B_min, B_max - Bj);
  for (int i = 0; i < 6; ++i) {
    const double d = room * std::pow(10.0, -1.0 - 0.5 * i);
    Bs.push_back(Bj - d);
    Bs.push_back(Bj + d);
  }
  std::sort(Bs.begin(), Bs.end());
  std::vector<double> B, a;
  for (double b : Bs) {
    const double l = offset + slope * b;
    if (std::abs(l - lj) <= 1e-6 * lj || near_pole(family, l, 1e-7)) continue;
    B.push_back(b);
    a.push_back(core::effective_amplitude(family.with_lambda(l), 0.0).real());
  }
  // The objective has a pole at every sample, so B0 is searched between the samples next to Bj.
  double gap = B_max - B_min;
  for (double b : B) gap = std::min(gap, std::abs(b - Bj));
  FieldMap fm = fit_field_law(B, a, Bj - 0.5 * gap, Bj + 0.5 * gap);
  fm.slope = slope;
  fm.offset = offset;
  fm.lambda_j = lj;
  fm.lambda_at_B0 = offset + slope * fm.B0;
  return fm;
}

}  // namespace feshbach::scan
