#include "feshbach/ode.hpp"

#include <algorithm>
#include <cmath>

#include "feshbach/error.hpp"

namespace feshbach::radial {

RadialIntegrator::RadialIntegrator(Potential pot, const RadialGrid& grid)
    : pot_(std::move(pot)), n_nodes_(grid.size()), r_max_(grid.r_max()), h_max_(0.25 * grid.min_spacing()) {
  stations_.push_back({0.0, -1});
  for (std::size_t i = 0; i < grid.size(); ++i) stations_.push_back({grid.node(i), static_cast<std::ptrdiff_t>(i)});
  for (double b : pot_.breakpoints())
    if (b > 0.0 && b < r_max_) stations_.push_back({b, -1});
  for (double b : grid.breakpoints()) stations_.push_back({b, -1});
  stations_.push_back({r_max_, -1});
  std::stable_sort(stations_.begin(), stations_.end(), [](const Station& a, const Station& b) { return a.r < b.r; });
}

std::vector<RadialSolution> RadialIntegrator::run(cplx z, std::vector<cplx> y, bool outward,
                                                  int* sign_changes) const {
  const std::size_t comps = y.size() / 2;
  std::vector<RadialSolution> out(comps);
  for (auto& s : out) {
    s.value = CVec::Zero(static_cast<Eigen::Index>(n_nodes_));
    s.derivative = CVec::Zero(static_cast<Eigen::Index>(n_nodes_));
  }

  auto record = [&](const Station& st) {
    for (std::size_t c = 0; c < comps; ++c) {
      if (st.node >= 0) {
        out[c].value[st.node] = y[2 * c];
        out[c].derivative[st.node] = y[2 * c + 1];
      }
      if (st.r == 0.0) {
        out[c].value_at_origin = y[2 * c];
        out[c].derivative_at_origin = y[2 * c + 1];
      }
      if (st.r == r_max_) {
        out[c].value_at_end = y[2 * c];
        out[c].derivative_at_end = y[2 * c + 1];
      }
    }
  };

  std::vector<cplx> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  double lo = 0.0, hi = 0.0;
  auto rhs = [&](double r, const std::vector<cplx>& s, std::vector<cplx>& ds) {
    const double eta = 1e-13 * std::max(1.0, hi);
    const double rc = std::clamp(r, lo + eta, hi - eta);
    const cplx q = pot_.value(rc) - z;
    for (std::size_t c = 0; c < comps; ++c) {
      ds[2 * c] = s[2 * c + 1];
      ds[2 * c + 1] = q * s[2 * c] - (c >= 2 ? s[2 * (c - 2)] : cplx{0.0, 0.0});
    }
  };

  const std::size_t m = stations_.size();
  double prev_sign = 0.0;
  for (std::size_t step = 0; step < m; ++step) {
    const Station& st = outward ? stations_[step] : stations_[m - 1 - step];
    if (step > 0) {
      const Station& from = outward ? stations_[step - 1] : stations_[m - step];
      const double span = st.r - from.r;
      if (span != 0.0) {
        lo = std::min(from.r, st.r);
        hi = std::max(from.r, st.r);
        const auto nsub = static_cast<int>(std::ceil(std::abs(span) / h_max_ - 1e-9));
        const double h = span / std::max(nsub, 1);
        double r = from.r;
        for (int s = 0; s < std::max(nsub, 1); ++s) {
          rhs(r, y, k1);
          for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
          rhs(r + 0.5 * h, tmp, k2);
          for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
          rhs(r + 0.5 * h, tmp, k3);
          for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
          rhs(r + h, tmp, k4);
          for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
          r = from.r + h * (s + 1);
          if (!std::isfinite(std::abs(y[0])))
            fail(ErrorKind::NumericFailure,
                 "radial integration overflowed near r = " + std::to_string(r) +
                     "; reduce r_max or the decay rate (rescale the problem)");
          if (sign_changes) {
            const double sg = y[0].real() > 0.0 ? 1.0 : (y[0].real() < 0.0 ? -1.0 : 0.0);
            if (sg != 0.0) {
              if (prev_sign != 0.0 && sg != prev_sign) ++*sign_changes;
              prev_sign = sg;
            }
          }
        }
      }
    }
    record(st);
  }
  return out;
}

RadialSolution RadialIntegrator::regular(cplx z) const {
  return run(z, {cplx{0.0, 0.0}, cplx{1.0, 0.0}}, true, nullptr).front();
}

RadialSolution RadialIntegrator::inward(cplx z, cplx value_end, cplx derivative_end) const {
  return run(z, {value_end, derivative_end}, false, nullptr).front();
}

int RadialIntegrator::count_nodes(double energy) const {
  int changes = 0;
  run(cplx{energy, 0.0}, {cplx{0.0, 0.0}, cplx{1.0, 0.0}}, true, &changes);
  return changes;
}

std::vector<RadialSolution> RadialIntegrator::regular_series(int order) const {
  require(order >= 0, "series order must be non-negative");
  std::vector<cplx> y(2 * static_cast<std::size_t>(order + 1), cplx{0.0, 0.0});
  y[1] = 1.0;
  return run(cplx{0.0, 0.0}, y, true, nullptr);
}

std::vector<RadialSolution> RadialIntegrator::outgoing_series(int order) const {
  require(order >= 0, "series order must be non-negative");
  // exp(i k R) = sum_n (i R)^n / n! k^n, derivative i k exp(i k R).
  std::vector<cplx> y(2 * static_cast<std::size_t>(order + 1));
  cplx term{1.0, 0.0};
  for (int n = 0; n <= order; ++n) {
    if (n > 0) term *= kI * r_max_ / static_cast<double>(n);
    y[2 * static_cast<std::size_t>(n)] = term;
    // d/dr of (i k r)^n / n! = i^n n r^(n-1)/n! k^n
    y[2 * static_cast<std::size_t>(n) + 1] = n == 0 ? cplx{0.0, 0.0} : term * static_cast<double>(n) / r_max_;
  }
  return run(cplx{0.0, 0.0}, y, false, nullptr);
}

}  // namespace feshbach::radial
