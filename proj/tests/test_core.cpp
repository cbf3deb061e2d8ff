#include <algorithm>

#include "doctest.h"
#include "feshbach/core.hpp"
#include "feshbach/error.hpp"
#include "feshbach/oracles.hpp"

using namespace feshbach;
using namespace feshbach::core;
using radial::PotentialSpec;

namespace {

const Potential kV = PotentialSpec::square_barrier(4.0, 1.0);
const Potential kU = PotentialSpec::square_well(4.0, 1.0);
const PotentialSpec kW = PotentialSpec::gaussian(4.0, 1.0);
constexpr double kLambda0 = 1.2945467866984;

ChannelModel model(const Potential& W, double lambda, std::size_t n = 200, double r_max = 20.0) {
  return ChannelModel(kV, kU, W, lambda, model_grid(kV, kU, W, r_max, n));
}

Potential scaled(double eps) {
  Potential p;
  p.add(eps, kW);
  return p;
}

std::vector<cplx> nonzero_sorted(const Eigen::VectorXcd& ev, double tol) {
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > tol) out.push_back(ev[i]);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

}  // namespace

TEST_CASE("zero coupling reduces to the open channel") {
  const ChannelModel m = model(Potential::zero(), 0.8);
  CHECK(m.support().empty());
  CHECK(assemble_M(m, 0.0).norm() == 0.0);
  CHECK(std::abs(effective_amplitude(m, 0.0) - m.a_v0()) < 1e-14);
  CHECK(std::abs(m.a_v0() - oracles::barrier_amplitude(4.0, 1.0)) < 1e-8);
}

TEST_CASE("M and N share their nonzero spectrum") {
  const ChannelModel m = model(kW, 0.8);
  for (double k : {0.0, 0.3}) {
    const auto em = nonzero_sorted(blockcalc::eigenvalues(assemble_M(m, k)), 1e-8);
    const auto en = nonzero_sorted(blockcalc::eigenvalues(assemble_N(m, k)), 1e-8);
    REQUIRE(em.size() == en.size());
    REQUIRE(!em.empty());
    for (std::size_t i = 0; i < em.size(); ++i) CHECK(std::abs(em[i] - en[i]) < 1e-8);
  }
}

TEST_CASE("weak coupling shift is quadratic") {
  const double a0 = model(Potential::zero(), 0.8).a_v0();
  const double d1 = effective_amplitude(model(scaled(0.01), 0.8), 0.0).real() - a0;
  const double d2 = effective_amplitude(model(scaled(0.02), 0.8), 0.0).real() - a0;
  CHECK(std::abs(std::log2(d2 / d1) - 2.0) < 1e-3);
}

TEST_CASE("both Schur complement factorizations agree") {
  const ChannelModel m = model(kW, 0.8);
  const CInverse ci = assemble_C_inverse(m, 0.2);
  CHECK(ci.agreement < 1e-8);
  const blockcalc::Block2x2 R = full_resolvent(m, 0.2);
  CHECK((R.L00 - ci.left).norm() / ci.left.norm() < 1e-8);
}

TEST_CASE("squared closed-channel resolvent is minus its lambda derivative") {
  const ChannelModel m = model(kW, 0.8);
  const auto& g = m.grid();
  const double lam = 0.8, h = 1e-4;
  auto op = [&](double l) { return radial::greens_kernel(kU, cplx(-l, 0.0), g).op; };
  CVec f(g.nodes().size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = std::exp(-g.nodes()[i] * g.nodes()[i]);
  const CMat R = op(lam);
  const CVec sq = R * (R * f);
  const CVec fd = -(op(lam + h) * f - op(lam - h) * f) / (2.0 * h);
  CHECK((sq - fd).norm() / sq.norm() < 1e-6);
}

TEST_CASE("the reference critical value is of the first kind") {
  const ChannelModel m(kV, kU, kW, kLambda0, model_grid(kV, kU, kW));
  const KernelSpaceReport ks = kernel_space(m);
  CHECK(ks.dim_M == 1);
  CHECK(ks.label == CaseLabel::FirstKind);
  CHECK(classify(ks).label == CaseLabel::FirstKind);
  const auto st = zero_energy_state(m, ks.basis_M.front());
  CHECK(zero_energy_residual(m, st) < 1e-8);
  const auto gen = classify(m.with_lambda(0.8));
  CHECK(gen.label == CaseLabel::Generic);
}

TEST_CASE("model assumptions are validated") {
  CHECK_THROWS_AS(model(kW, -1.0), Error);
  CHECK_THROWS_AS(ChannelModel(kV, Potential::zero(), kW, 0.8, model_grid(kV, Potential::zero(), kW)), Error);
}
