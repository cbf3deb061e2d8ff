#include <cmath>

#include "doctest.h"
#include "feshbach/error.hpp"
#include "feshbach/radial.hpp"
#include "feshbach/roots.hpp"
#include "feshbach/weighted_norm.hpp"

using namespace feshbach;
using namespace feshbach::radial;

namespace {

// Lowest root of sqrt(U0 - |E|) cot(sqrt(U0 - |E|) R) = -sqrt|E| by bisection.
double square_well_ground_state(double U0, double R) {
  auto f = [&](double kappa) {
    const double q = std::sqrt(U0 - kappa * kappa);
    return q * std::cos(q * R) + kappa * std::sin(q * R);
  };
  // Ground state has q R in (pi/2, pi).
  double lo = std::sqrt(std::max(0.0, U0 - std::pow(kPi / R, 2))) + 1e-14;
  double hi = std::sqrt(U0 - std::pow(0.5 * kPi / R, 2));
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    ((f(m) > 0.0) == (f(hi) > 0.0) ? hi : lo) = m;
  }
  return -std::pow(0.5 * (lo + hi), 2);
}

RadialGrid default_grid(const Potential& pot, std::size_t n = 600, double r_max = 25.0) {
  const auto bp = pot.breakpoints();
  return build_grid(r_max, n, QuadratureRule::GaussLegendre, bp);
}

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("grid quadrature rules") {
  const auto t = build_grid(10.0, 4, QuadratureRule::Trapezoid, {}, true);
  CHECK(t.weights().sum() == doctest::Approx(10.0).epsilon(1e-12));
  const auto g = build_grid(20.0, 800, QuadratureRule::GaussLegendre);
  CHECK(std::abs(g.integrate(Vec(g.nodes())) - 200.0) < 1e-10);
  const Vec e = (-g.nodes().array()).exp();
  CHECK(std::abs(g.integrate(e) - (1.0 - std::exp(-20.0))) < 1e-10);
  for (Eigen::Index i = 1; i < g.nodes().size(); ++i) CHECK(g.nodes()[i] > g.nodes()[i - 1]);
  CHECK(g.nodes()[0] > 0.0);
  CHECK(g.weights().minCoeff() > 0.0);
  CHECK_THROWS_AS(build_grid(0.0, 100, QuadratureRule::GaussLegendre), Error);
  CHECK_THROWS_AS(build_grid(10.0, 8, QuadratureRule::GaussLegendre), Error);
}

TEST_CASE("potential families") {
  const auto sw = PotentialSpec::square_well(4.0, 1.0);
  CHECK(sw.value(0.5) == -4.0);
  CHECK(sw.value(2.0) == 0.0);
  CHECK(PotentialSpec::gaussian(2.0, 1.0).value(0.0) == 2.0);
  CHECK(satisfies_decay(PotentialSpec::gaussian(2.0, 1.0), 4, 3.0, 25.0));
  CHECK_THROWS_AS(parse_family("lennard_jones"), Error);
}

TEST_CASE("regular and outgoing solutions") {
  const auto grid = default_grid(Potential::zero());
  const Vec& r = grid.nodes();
  const auto u0 = regular_solution(Potential::zero(), 0.0, grid);
  CHECK(max_abs(u0.value - r.cast<cplx>()) < 1e-10);
  const double k = 0.7;
  const auto uk = regular_solution(Potential::zero(), k * k, grid);
  const Vec sinkr = (k * r.array()).sin() / k;
  CHECK(max_abs(uk.value - sinkr.cast<cplx>()) < 1e-9);

  const Potential well = PotentialSpec::square_well(4.0, 1.0);
  const auto grid_w = default_grid(well);
  const auto uw = regular_solution(well, 0.0, grid_w);
  for (Eigen::Index i = 0; i < grid_w.nodes().size() && grid_w.nodes()[i] < 1.0; ++i)
    CHECK(std::abs(uw.value[i] - std::sin(2.0 * grid_w.nodes()[i]) / 2.0) < 1e-10);

  const auto w = outgoing_solution(Potential::zero(), k * k, grid);
  CVec e(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) e[i] = std::exp(kI * k * r[i]);
  CHECK(max_abs(w.value - e) < 1e-9);
  const auto wd = outgoing_solution(Potential::zero(), -0.25, grid);
  const Vec decay = (-0.5 * r.array()).exp();
  CHECK(max_abs(wd.value - decay.cast<cplx>()) < 1e-9);

  const CVec W = wronskian_profile(uk, w);
  CHECK(max_abs(W - CVec::Constant(W.size(), -1.0)) < 1e-9);
  CHECK(wronskian_spread(uk, w) < 1e-8);

  // A slowly decaying tail is rejected.
  CHECK_THROWS_AS(outgoing_solution(Potential(PotentialSpec::exponential(1.0, 2.0)), 0.25, grid), Error);
}

TEST_CASE("free Green's kernels") {
  const auto grid = default_grid(Potential::zero());
  const Vec& r = grid.nodes();
  const auto n = r.size();
  for (double k : {0.1, 0.5, 1.0}) {
    const auto G = greens_kernel(Potential::zero(), k * k, grid);
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = std::min(r[i], r[j]), hi = std::max(r[i], r[j]);
        err = std::max(err, std::abs(G.kernel(i, j) - std::sin(k * lo) * std::exp(kI * k * hi) / k));
      }
    CHECK(err < 1e-8);
    CHECK(G.branch == Branch::Outgoing);
  }
  for (double kappa : {0.5, 1.0}) {
    const auto G = greens_kernel(Potential::zero(), -kappa * kappa, grid);
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = std::min(r[i], r[j]), hi = std::max(r[i], r[j]);
        err = std::max(err, std::abs(G.kernel(i, j) - std::sinh(kappa * lo) * std::exp(-kappa * hi) / kappa));
      }
    CHECK(err < 1e-8);
    CHECK(G.branch == Branch::Decaying);
    CHECK(G.kernel.imag().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Green's operator inverts H - z") {
  const Potential well = PotentialSpec::square_well(4.0, 1.0);
  const auto grid = default_grid(well);
  const Vec& r = grid.nodes();
  const Vec v = eval_potential(well, grid).values;
  CVec f(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) f[i] = r[i] * r[i] * std::exp(-r[i] * r[i]);
  for (cplx z : {cplx{0.09, 0.0}, cplx{-0.64, 0.0}, cplx{0.0, 0.0}}) {
    const auto G = greens_kernel(well, z, grid);
    CHECK(max_abs(G.kernel - G.kernel.transpose()) <= 1e-10 * max_abs(G.kernel));
    const CVec g = G.op * f;
    const CVec hg = -grid.second_derivative(g) + (v.cast<cplx>().array() * g.array()).matrix() - z * g;
    double err = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (r[i] < 20.0) err = std::max(err, std::abs(hg[i] - f[i]));
    CHECK(err < 1e-6);
  }
  // Resolvent identity on the decaying branch, applied to a smooth function (the columns of a
  // single operator carry a kink, so a composed matrix is only as good as the kink allows).
  const auto G1 = greens_kernel(well, -0.3, grid);
  const auto G2 = greens_kernel(well, -0.9, grid);
  const CVec lhs = (G1.op - G2.op) * f;
  const CVec rhs = (-0.3 + 0.9) * (G1.op * (G2.op * f));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6 * lhs.cwiseAbs().maxCoeff());
}

TEST_CASE("bound states of square wells") {
  const Potential well = PotentialSpec::square_well(4.0, 1.0);
  const auto grid = default_grid(well);
  const auto bs = bound_states(well, grid);
  REQUIRE(bs.size() == 1);
  CHECK(std::abs(bs[0].energy - square_well_ground_state(4.0, 1.0)) < 1e-8);
  CHECK(std::abs(grid.integrate(Vec(bs[0].wavefunction.cwiseAbs2())) - 1.0) < 1e-8);
  CHECK(bound_states(Potential(PotentialSpec::square_well(1.0, 1.0)), grid).empty());
  CHECK_THROWS_AS(greens_kernel(well, bs[0].energy, grid), Error);

  const Potential deep = PotentialSpec::square_well(30.0, 1.0);
  const auto bs2 = bound_states(deep, default_grid(deep));
  REQUIRE(bs2.size() == 2);
  CHECK(bs2[0].energy < bs2[1].energy);
  CHECK(std::abs(grid.integrate(Vec(bs2[0].wavefunction.cwiseProduct(bs2[1].wavefunction)))) < 1e-8);
  CHECK(std::abs(grid.integrate(Vec(bs2[1].wavefunction.cwiseAbs2())) - 1.0) < 1e-8);
}

TEST_CASE("scattering data") {
  const auto grid0 = default_grid(Potential::zero());
  const auto free0 = scattering_data(Potential::zero(), 0.0, grid0);
  CHECK(std::abs(free0.amplitude) < 1e-10);
  CHECK(max_abs(free0.eigenfunction - grid0.nodes().cast<cplx>()) < 1e-9);

  const Potential barrier = PotentialSpec::square_barrier(4.0, 1.0);
  const auto grid = default_grid(barrier);
  const auto sd0 = scattering_data(barrier, 0.0, grid);
  const double a_s = 1.0 - std::tanh(2.0) / 2.0;
  CHECK(std::abs(sd0.amplitude.real() + a_s) < 1e-8);
  for (double k = 0.05; k <= 1.0 + 1e-12; k += 0.05) {
    const auto sd = scattering_data(barrier, k, grid);
    const double q = std::sqrt(4.0 - k * k);
    const double exact = std::remainder(std::atan(k * std::tanh(q) / q) - k, kPi);
    CHECK(std::abs(sd.phase_shift - exact) < 1e-6);
    CHECK(std::abs(std::abs(sd.s_matrix()) - 1.0) < 1e-10);
    CHECK(std::abs(sd.amplitude - (sd.s_matrix() - 1.0) / (2.0 * kI * k)) < 1e-12);
  }
}

TEST_CASE("k-derivatives of the resolvent") {
  const auto grid = default_grid(Potential::zero());
  const Vec& r = grid.nodes();
  const auto n = r.size();
  const auto d1 = resolvent_k_derivative(Potential::zero(), 1, grid);
  const auto d2 = resolvent_k_derivative(Potential::zero(), 2, grid);
  double e1 = 0.0, e2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double lo = std::min(r[i], r[j]), hi = std::max(r[i], r[j]);
      e1 = std::max(e1, std::abs(d1.kernel(i, j) - kI * r[i] * r[j]));
      e2 = std::max(e2, std::abs(d2.kernel(i, j) + (lo * lo * lo / 3.0 + lo * hi * hi)));
    }
  CHECK(e1 < 1e-8 * 625.0);
  CHECK(e2 < 1e-8 * 15625.0);

  const Potential barrier = PotentialSpec::square_barrier(4.0, 1.0);
  const auto gb = default_grid(barrier);
  const auto s1 = resolvent_k_derivative(barrier, 1, gb);
  CHECK(s1.fd_discrepancy < 1e-6);
  const auto id = resolvent_derivative_identity(barrier, gb);
  CHECK(max_abs(id.kernel - s1.kernel) < 1e-6 * max_abs(s1.kernel));
  const auto s3 = resolvent_k_derivative(barrier, 3, gb);
  CHECK(s3.fd_discrepancy < 1e-5);
}

TEST_CASE("weighted norms") {
  const auto grid = default_grid(Potential::zero());
  const Vec& r = grid.nodes();
  const CVec f = (-r.array()).exp().matrix().cast<cplx>();
  const double plain = weighted_norm(f, grid, {0.0, WeightedNormSpec::Sign::Growth});
  CHECK(std::abs(plain - std::sqrt(1.0 - std::exp(-50.0)) / std::sqrt(2.0)) < 1e-10);
  CHECK(weighted_norm(f, grid, {1.0, WeightedNormSpec::Sign::Growth}) >= plain);
  const CMat I = CMat::Identity(r.size(), r.size());
  const double expect = 1.0 / (1.0 + r[0] * r[0]);
  CHECK(std::abs(weighted_operator_norm(I, grid, 1.0, 1.0) - expect) < 1e-12);
  CHECK(expect <= 1.0);
}
