#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "feshbach/error.hpp"

namespace feshbach {

/// Root of f on a sign-changing bracket [a, b], to relative tolerance `rel_tol`.
template <class F>
double bracketed_root(F&& f, double a, double b, double rel_tol, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) fail(ErrorKind::NumericFailure, "root bracket does not change sign");
  std::uintmax_t iters = 200;
  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y)) || std::abs(x - y) < 1e-300;
  };
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (r.first + r.second);
}

template <class F>
double bracketed_root(F&& f, double a, double b, double rel_tol) {
  return bracketed_root(f, a, b, rel_tol, f(a), f(b));
}

/// Minimizer of f on [a, b] (Brent), returns (x, f(x)).
template <class F>
std::pair<double, double> minimize(F&& f, double a, double b, int bits = 40) {
  std::uintmax_t iters = 500;
  return boost::math::tools::brent_find_minima(f, a, b, bits, iters);
}

}  // namespace feshbach
