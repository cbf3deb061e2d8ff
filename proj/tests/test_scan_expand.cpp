#include "doctest.h"
#include "feshbach/error.hpp"
#include "feshbach/expand.hpp"
#include "feshbach/scan.hpp"

using namespace feshbach;
using radial::PotentialSpec;

TEST_CASE("pole fit recovers a synthetic law") {
  const double lj = 1.3, c = 0.4, b = -0.5;
  const auto ls = scan::pole_offsets(lj);
  std::vector<double> a;
  for (double l : ls) a.push_back(b + c / (l - lj));
  const auto f = scan::pole_fit(ls, a, lj);
  CHECK(std::abs(f.c - c) < 1e-12);
  CHECK(std::abs(f.b - b) < 1e-9);
  CHECK(f.residual < 1e-10);
  CHECK(f.reliable);
  // Too few samples on one side.
  std::vector<double> half(ls.begin(), ls.begin() + 8), ah(a.begin(), a.begin() + 8);
  CHECK_THROWS_AS(scan::pole_fit(half, ah, lj), Error);
}

TEST_CASE("pole fit flags noise") {
  const double lj = 1.0;
  const auto ls = scan::pole_offsets(lj);
  std::vector<double> a;
  for (std::size_t i = 0; i < ls.size(); ++i) a.push_back((i % 2 ? 1.0 : -1.0) * 1e3);
  try {
    scan::pole_fit(ls, a, lj);
    FAIL("expected an unreliable fit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FitUnreliable);
  }
  CHECK_FALSE(scan::pole_fit(ls, a, lj, false, true).reliable);
}

TEST_CASE("interlacing predicate") {
  CHECK(scan::interlaces({1.3}, {-0.4}));
  CHECK_FALSE(scan::interlaces({0.3}, {-0.4}));
  CHECK(scan::interlaces({0.5, 2.0}, {-1.5, -0.3}));
  CHECK_FALSE(scan::interlaces({1.6, 2.0}, {-1.5, -0.3}));
  CHECK_FALSE(scan::interlaces({}, {-0.4}));
}

TEST_CASE("eigenvalue traces vanish without coupling") {
  const radial::Potential V = PotentialSpec::square_barrier(4.0, 1.0), U = PotentialSpec::square_well(4.0, 1.0);
  const core::ChannelModel fam(V, U, radial::Potential::zero(), 0.8, core::model_grid(V, U, radial::Potential::zero(), 20.0, 200));
  const auto tr = scan::eigen_trace(fam, {0.1, 0.5, 1.0}, 2);
  CHECK(tr.mu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(scan::critical_values(fam, 0.05, 1.5).lambdas.empty());
}

TEST_CASE("field law fit on synthetic data") {
  std::vector<double> B, a;
  const double B0 = 1.3, Delta = 0.02, abg = -0.5;
  for (int i = 0; i <= 40; ++i) {
    const double x = 1.2 + 0.005 * i + 0.0013;
    B.push_back(x);
    a.push_back(abg * (1.0 - Delta / (x - B0)));
  }
  const auto f = scan::fit_field_law(B, a, 1.295, 1.305);
  CHECK(std::abs(f.B0 - B0) < 1e-6);
  CHECK(std::abs(f.a_bg - abg) < 1e-5);
  CHECK(std::abs(f.Delta - Delta) < 1e-5);
}

TEST_CASE("order estimates of synthetic norms") {
  const auto ks = expand::default_k_sequence();
  REQUIRE(ks.size() == 7);
  CHECK(ks.back() == doctest::Approx(0.1 / 64));
  std::vector<double> simple, mixed, flat;
  for (double k : ks) {
    simple.push_back(3.0 / k);
    mixed.push_back(1.0 / (k * k) + 5.0 / k);
    flat.push_back(2.0 + 0.1 * k);
  }
  const auto o1 = expand::singular_order_estimate(ks, simple);
  CHECK(std::abs(o1.slope + 1.0) < 1e-10);
  CHECK(o1.reliable);
  CHECK(o1.ci_low <= o1.slope + 1e-12);
  CHECK(o1.ci_high >= o1.slope - 1e-12);
  const auto o2 = expand::singular_order_estimate(ks, mixed);
  CHECK(o2.curvature);
  CHECK_FALSE(o2.reliable);
  CHECK(std::abs(o2.tail_slope + 2.0) < 0.1);
  CHECK(std::abs(expand::singular_order_estimate(ks, flat).slope) < 0.01);
  const auto a = expand::singular_order_estimate(ks, mixed, 99);
  const auto b = expand::singular_order_estimate(ks, mixed, 99);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
}
