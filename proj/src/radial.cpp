#include "feshbach/radial.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "feshbach/error.hpp"
#include "feshbach/roots.hpp"

namespace feshbach::radial {

namespace {

using Index = Eigen::Index;

void check_domain(const Potential& pot, const RadialGrid& grid) {
  if (pot.is_zero()) return;
  const double tail = std::abs(pot.value(grid.r_max()));
  if (tail > 1e-12 * pot.scale())
    fail(ErrorKind::DomainTooSmall, "potential " + pot.describe() + " is not negligible at r_max = " +
                                        std::to_string(grid.r_max()) + " (|V| = " + std::to_string(tail) +
                                        "); increase r_max");
}

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

struct KernelPair {
  CMat kernel;
  cplx wronskian;
  RadialSolution u, w;
};

KernelPair solve_pair(const Potential& pot, cplx k, const RadialGrid& grid, bool with_kernel = true) {
  check_domain(pot, grid);
  const RadialIntegrator integ(pot, grid);
  const cplx z = k * k;
  const cplx e = std::exp(kI * k * grid.r_max());
  KernelPair out{CMat{}, cplx{}, integ.regular(z), integ.inward(z, e, kI * k * e)};
  const CVec prof = wronskian_profile(out.u, out.w);
  const Index mid = prof.size() / 2;
  out.wronskian = prof[mid];
  double scale = 0.0;
  for (Index i = 0; i < prof.size(); ++i)
    scale = std::max(scale, std::abs(out.u.value[i] * out.w.derivative[i]) + std::abs(out.u.derivative[i] * out.w.value[i]));
  if (std::abs(out.wronskian) < 1e-12 * scale)
    fail(ErrorKind::AtEigenvalue, "vanishing Wronskian at z = " + std::to_string(z.real()) + "; z is a bound-state energy");
  const double spread = wronskian_spread(out.u, out.w);
  if (spread > 1e-8)
    fail(ErrorKind::NumericFailure, "Wronskian varies by " + std::to_string(spread) + " across the grid; refine the grid");
  if (with_kernel) out.kernel = separable_kernel({SeparableTerm{-1.0 / out.wronskian, out.u.value, out.w.value}}, grid);
  return out;
}

}  // namespace

cplx momentum_from_energy(cplx z) {
  cplx k = std::sqrt(z);
  if (k.imag() < 0.0 || (k.imag() == 0.0 && k.real() < 0.0)) k = -k;
  return k;
}

CMat separable_kernel(const std::vector<SeparableTerm>& terms, const RadialGrid& grid) {
  const auto n = static_cast<Index>(grid.size());
  CMat K = CMat::Zero(n, n);
  for (const auto& t : terms)
    for (Index j = 0; j < n; ++j)
      for (Index i = j; i < n; ++i) K(i, j) += t.alpha * t.lower[j] * t.upper[i];
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
  return K;
}

namespace {

// Replaces the same-panel entries of A = K diag(w) by product-integration weights.
void correct_panels(CMat& A, const std::vector<SeparableTerm>& terms, const RadialGrid& grid) {
  if (grid.rule() != QuadratureRule::GaussLegendre) return;
  const Vec& w = grid.weights();
  for (const auto& p : grid.panels()) {
    const auto b = static_cast<Index>(p.begin);
    const auto m = static_cast<Index>(p.order);
    for (Index jj = 0; jj < m; ++jj)
      for (Index ii = 0; ii < m; ++ii) {
        const Index i = b + ii, j = b + jj;
        const double L = p.cumulative(ii, jj);
        cplx v{0.0, 0.0};
        for (const auto& t : terms) v += t.alpha * (L * t.lower[j] * t.upper[i] + (w[j] - L) * t.lower[i] * t.upper[j]);
        A(i, j) = v;
      }
  }
}

}  // namespace

CMat separable_operator(const std::vector<SeparableTerm>& terms, const RadialGrid& grid) {
  CMat A = separable_kernel(terms, grid) * grid.weights().cast<cplx>().asDiagonal();
  correct_panels(A, terms, grid);
  return A;
}

CMat separable_operator_block(const std::vector<SeparableTerm>& terms, const RadialGrid& grid,
                              const std::vector<Index>& S) {
  const auto m = static_cast<Index>(S.size());
  const Vec& w = grid.weights();
  const bool gl = grid.rule() == QuadratureRule::GaussLegendre;
  CMat A(m, m);
  for (Index b = 0; b < m; ++b)
    for (Index a = 0; a < m; ++a) {
      const Index i = S[static_cast<std::size_t>(a)], j = S[static_cast<std::size_t>(b)];
      cplx v{0.0, 0.0};
      if (gl && grid.panel_of(static_cast<std::size_t>(i)) == grid.panel_of(static_cast<std::size_t>(j))) {
        const auto& p = grid.panels()[grid.panel_of(static_cast<std::size_t>(i))];
        const auto pb = static_cast<Index>(p.begin);
        const double L = p.cumulative(i - pb, j - pb);
        for (const auto& t : terms) v += t.alpha * (L * t.lower[j] * t.upper[i] + (w[j] - L) * t.lower[i] * t.upper[j]);
      } else {
        const Index lo = std::min(i, j), hi = std::max(i, j);
        for (const auto& t : terms) v += t.alpha * t.lower[lo] * t.upper[hi];
        v *= w[j];
      }
      A(a, b) = v;
    }
  return A;
}

CMat kernel_to_operator(const CMat& kernel, const RadialGrid& grid) {
  return kernel * grid.weights().cast<cplx>().asDiagonal();
}

CMat operator_to_kernel(const CMat& op, const RadialGrid& grid) {
  return op * grid.weights().cwiseInverse().cast<cplx>().asDiagonal();
}

RadialSolution regular_solution(const Potential& pot, cplx z, const RadialGrid& grid) {
  return RadialIntegrator(pot, grid).regular(z);
}

RadialSolution outgoing_solution(const Potential& pot, cplx z, const RadialGrid& grid) {
  return outgoing_solution_k(pot, momentum_from_energy(z), grid);
}

RadialSolution outgoing_solution_k(const Potential& pot, cplx k, const RadialGrid& grid) {
  check_domain(pot, grid);
  const cplx e = std::exp(kI * k * grid.r_max());
  return RadialIntegrator(pot, grid).inward(k * k, e, kI * k * e);
}

CVec wronskian_profile(const RadialSolution& u, const RadialSolution& w) {
  return u.value.cwiseProduct(w.derivative) - u.derivative.cwiseProduct(w.value);
}

double wronskian_spread(const RadialSolution& u, const RadialSolution& w) {
  const CVec prof = wronskian_profile(u, w);
  const cplx ref = prof[prof.size() / 2];
  double scale = 0.0, dev = 0.0;
  for (Index i = 0; i < prof.size(); ++i) {
    scale = std::max(scale, std::abs(u.value[i] * w.derivative[i]) + std::abs(u.derivative[i] * w.value[i]));
    dev = std::max(dev, std::abs(prof[i] - ref));
  }
  return scale > 0.0 ? dev / scale : 0.0;
}

GreensKernel greens_kernel(const Potential& pot, cplx z, const RadialGrid& grid) {
  return greens_kernel_k(pot, momentum_from_energy(z), grid);
}

GreensKernel greens_kernel_k(const Potential& pot, cplx k, const RadialGrid& grid) {
  KernelPair kp = solve_pair(pot, k, grid);
  GreensKernel g;
  g.energy = k * k;
  g.momentum = k;
  g.branch = (k.real() == 0.0 && k.imag() > 0.0) ? Branch::Decaying : Branch::Outgoing;
  g.potential = pot;
  g.wronskian = kp.wronskian;
  g.op = kp.kernel * grid.weights().cast<cplx>().asDiagonal();
  correct_panels(g.op, {SeparableTerm{-1.0 / kp.wronskian, kp.u.value, kp.w.value}}, grid);
  g.kernel = std::move(kp.kernel);
  return g;
}

std::vector<BoundState> bound_states(const Potential& pot, const RadialGrid& grid) {
  std::vector<BoundState> states;
  if (pot.is_zero()) return states;
  check_domain(pot, grid);
  const RadialIntegrator integ(pot, grid);
  const double R = grid.r_max();

  double vmin = 0.0;
  for (Index i = 0; i < static_cast<Index>(grid.size()); ++i) vmin = std::min(vmin, pot.value(grid.node(i)));
  for (double b : pot.breakpoints()) vmin = std::min(vmin, pot.value(0.999999 * b));
  const double e_top = -std::pow(0.5 / R, 2);
  if (vmin >= e_top) return states;
  const double e_bottom = vmin * (1.0 + 1e-9) - 1e-12;

  std::map<double, int> counts;
  auto count = [&](double e) {
    auto it = counts.find(e);
    if (it != counts.end()) return it->second;
    const int c = integ.count_nodes(e);
    counts.emplace(e, c);
    return c;
  };
  const int n_states = count(e_top);
  if (count(e_bottom) != 0) fail(ErrorKind::NumericFailure, "node count below the potential minimum is nonzero");

  const auto nodes = grid.nodes();
  for (int j = 0; j < n_states; ++j) {
    // Bracket the j-th Dirichlet eigenvalue by bisection on the node count.
    double a = e_bottom, b = e_top;
    for (const auto& [e, c] : counts) {
      if (c <= j) a = std::max(a, e);
      if (c >= j + 1) b = std::min(b, e);
    }
    while (b - a > 1e-6 * std::abs(b)) {
      const double m = 0.5 * (a + b);
      (count(m) <= j ? a : b) = m;
    }
    // Match at the last classically allowed node.
    const double e_mid = 0.5 * (a + b);
    Index im = 0;
    for (Index i = 0; i < nodes.size(); ++i)
      if (pot.value(nodes[i]) < e_mid) im = i;
    auto matching = [&](double kappa) {
      const double e = -kappa * kappa;
      const auto u = integ.regular(e);
      const auto w = integ.inward(e, 1.0, -kappa);
      const cplx W = u.value[im] * w.derivative[im] - u.derivative[im] * w.value[im];
      const double s = std::abs(u.value[im] * w.derivative[im]) + std::abs(u.derivative[im] * w.value[im]);
      return W.real() / s;
    };
    double klo = std::sqrt(-b), khi = std::sqrt(-a);
    double flo = matching(klo), fhi = matching(khi);
    for (int widen = 0; widen < 60 && (flo > 0.0) == (fhi > 0.0); ++widen) {
      const double width = khi - klo;
      klo = std::max(0.5 * klo, klo - width);
      khi = std::min(std::sqrt(-e_bottom), khi + width);
      flo = matching(klo);
      fhi = matching(khi);
    }
    const double kappa = bracketed_root(matching, klo, khi, 1e-15, flo, fhi);
    const double e = -kappa * kappa;

    const auto u = integ.regular(e);
    const auto w = integ.inward(e, 1.0, -kappa);
    Vec eta(nodes.size());
    const double su = u.value[im].real(), sw = w.value[im].real();
    for (Index i = 0; i < nodes.size(); ++i) eta[i] = i <= im ? u.value[i].real() / su : w.value[i].real() / sw;
    const double tail = std::pow(w.value_at_end.real() / sw, 2) / (2.0 * kappa);
    eta /= std::sqrt(grid.integrate(Vec(eta.cwiseAbs2())) + tail);
    if (su < 0.0) eta = -eta;
    states.push_back(BoundState{e, eta, j});
  }
  std::sort(states.begin(), states.end(), [](const auto& x, const auto& y) { return x.energy < y.energy; });
  for (std::size_t j = 0; j < states.size(); ++j) states[j].index = static_cast<int>(j);
  return states;
}

ScatteringData scattering_data(const Potential& pot, double k, const RadialGrid& grid) {
  require(k >= 0.0 && std::isfinite(k), "scattering momentum must be non-negative");
  check_domain(pot, grid);
  const double R = grid.r_max();
  const auto u = regular_solution(pot, cplx{k * k, 0.0}, grid);
  const double uR = u.value_at_end.real(), dR = u.derivative_at_end.real();
  ScatteringData sd;
  sd.k = k;
  if (k == 0.0) {
    const double a0 = uR / dR - R;
    if (!std::isfinite(a0) || std::abs(a0) > 1e6 * R)
      fail(ErrorKind::AssumptionViolation,
           "open-channel potential has a zero-energy resonance or eigenstate (|A_V(0)| = " + std::to_string(std::abs(a0)) + ")");
    sd.phase_shift = 0.0;
    sd.amplitude = a0;
    sd.eigenfunction = u.value / dR;
    return sd;
  }
  double delta = std::atan2(k * uR, dR) - k * R;
  delta = std::remainder(delta, kPi);
  const double B = std::hypot(k * uR, dR);
  sd.phase_shift = delta;
  sd.amplitude = (std::exp(2.0 * kI * delta) - 1.0) / (2.0 * kI * k);
  sd.eigenfunction = std::exp(kI * delta) * u.value / B;
  return sd;
}

namespace {

CMat series_kernel(const Potential& pot, int order, const RadialGrid& grid, std::vector<SeparableTerm>& terms) {
  const RadialIntegrator integ(pot, grid);
  const auto us = integ.regular_series(order);
  const auto ws = integ.outgoing_series(order);
  std::vector<cplx> W(static_cast<std::size_t>(order + 1), cplx{0.0, 0.0});
  for (int n = 0; n <= order; ++n)
    for (int a = 0; a <= n; ++a) {
      const auto& ua = us[static_cast<std::size_t>(a)];
      const auto& wb = ws[static_cast<std::size_t>(n - a)];
      W[static_cast<std::size_t>(n)] += ua.value_at_end * wb.derivative_at_end - ua.derivative_at_end * wb.value_at_end;
    }
  if (std::abs(W[0]) < 1e-12)
    fail(ErrorKind::AssumptionViolation, "zero-energy Wronskian vanishes; the potential has a threshold resonance");
  std::vector<cplx> c(W.size());
  c[0] = -1.0 / W[0];
  for (std::size_t n = 1; n < W.size(); ++n) {
    cplx s{0.0, 0.0};
    for (std::size_t e = 0; e < n; ++e) s += c[e] * W[n - e];
    c[n] = -s / W[0];
  }
  const double fact = factorial(order);
  terms.clear();
  for (int e = 0; e <= order; ++e)
    for (int a = 0; a + e <= order; a += 2) {
      const int b = order - e - a;
      if (c[static_cast<std::size_t>(e)] == cplx{0.0, 0.0}) continue;
      terms.push_back(SeparableTerm{fact * c[static_cast<std::size_t>(e)], us[static_cast<std::size_t>(a)].value,
                                    ws[static_cast<std::size_t>(b)].value});
    }
  return separable_kernel(terms, grid);
}

CMat fd_derivative(const Potential& pot, int order, const RadialGrid& grid, double h) {
  auto G = [&](double k) { return solve_pair(pot, cplx{k, 0.0}, grid).kernel; };
  switch (order) {
    case 1: return (G(h) - G(-h)) / (2.0 * h);
    case 2: return (G(h) - 2.0 * G(0.0) + G(-h)) / (h * h);
    default: return (G(2 * h) - 2.0 * G(h) + 2.0 * G(-h) - G(-2 * h)) / (2.0 * h * h * h);
  }
}

}  // namespace

CMat greens_operator_block(const Potential& pot, cplx k, const RadialGrid& grid, const std::vector<Index>& S) {
  const KernelPair kp = solve_pair(pot, k, grid, false);
  return separable_operator_block({SeparableTerm{-1.0 / kp.wronskian, kp.u.value, kp.w.value}}, grid, S);
}

ResolventDerivative resolvent_k_derivative(const Potential& pot, int order, const RadialGrid& grid) {
  require(order >= 1 && order <= 3, "resolvent derivative order must be 1, 2 or 3");
  check_domain(pot, grid);
  ResolventDerivative out;
  out.order = order;
  std::vector<SeparableTerm> terms;
  out.kernel = series_kernel(pot, order, grid, terms);
  out.op = separable_operator(terms, grid);

  const double h = 0.1 / grid.r_max();
  const CMat d1 = fd_derivative(pot, order, grid, h);
  const CMat d2 = fd_derivative(pot, order, grid, 0.5 * h);
  const CMat d3 = fd_derivative(pot, order, grid, 0.25 * h);
  const CMat r12 = (4.0 * d2 - d1) / 3.0, r23 = (4.0 * d3 - d2) / 3.0;
  const CMat fd = (16.0 * r23 - r12) / 15.0;
  out.fd_discrepancy = (fd - out.kernel).cwiseAbs().maxCoeff() / out.kernel.cwiseAbs().maxCoeff();
  if (out.fd_discrepancy > 1e-5)
    fail(ErrorKind::NumericFailure, "k-derivative of order " + std::to_string(order) +
                                        ": series and finite-difference routes differ by " +
                                        std::to_string(out.fd_discrepancy));
  return out;
}

ResolventDerivative resolvent_derivative_identity(const Potential& pot, const RadialGrid& grid) {
  const auto n = static_cast<Index>(grid.size());
  const CVec r = grid.nodes().cast<cplx>();
  const CMat free_op = separable_operator({SeparableTerm{kI, r, r}}, grid);
  const CMat A = greens_kernel(pot, cplx{0.0, 0.0}, grid).op;
  const CVec v = eval_potential(pot, grid).values.cast<cplx>();
  const CMat I = CMat::Identity(n, n);
  ResolventDerivative out;
  out.order = 1;
  out.op = (I - A * v.asDiagonal()) * free_op * (I - v.asDiagonal() * A);
  out.kernel = operator_to_kernel(out.op, grid);
  return out;
}

}  // namespace feshbach::radial
