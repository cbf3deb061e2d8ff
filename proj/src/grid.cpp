#include "feshbach/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "feshbach/error.hpp"

namespace feshbach::radial {

QuadratureRule parse_rule(std::string_view name) {
  if (name == "trapezoid") return QuadratureRule::Trapezoid;
  if (name == "gauss_legendre") return QuadratureRule::GaussLegendre;
  fail(ErrorKind::InvalidArgument, "unknown quadrature rule '" + std::string(name) + "'");
}

std::string_view to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Trapezoid ? "trapezoid" : "gauss_legendre";
}

namespace {

// Legendre P_0..P_{m} at x.
std::vector<double> legendre_values(std::size_t m, double x) {
  std::vector<double> p(m + 1);
  p[0] = 1.0;
  if (m >= 1) p[1] = x;
  for (std::size_t k = 2; k <= m; ++k) {
    const double kk = static_cast<double>(k);
    p[k] = ((2.0 * kk - 1.0) * x * p[k - 1] - (kk - 1.0) * p[k - 2]) / kk;
  }
  return p;
}

struct ReferencePanel {
  Vec x, w;
  Mat cumulative;  // on [-1, 1]
  Mat second_derivative;
};

ReferencePanel make_reference(std::size_t order) {
  ReferencePanel ref;
  gauss_legendre(order, ref.x, ref.w);
  const auto p = static_cast<Eigen::Index>(order);

  // Lagrange basis expanded in Legendre polynomials; the expansion coefficients follow from
  // discrete orthogonality on the Gauss nodes: l_j = sum_m (2m+1)/2 w_j P_m(x_j) P_m.
  std::vector<std::vector<double>> pj(order);
  for (std::size_t j = 0; j < order; ++j) pj[j] = legendre_values(order, ref.x[static_cast<Eigen::Index>(j)]);

  ref.cumulative.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto pi = legendre_values(order, ref.x[i]);
    for (Eigen::Index j = 0; j < p; ++j) {
      double s = 0.5 * (ref.x[i] + 1.0);
      for (std::size_t m = 1; m < order; ++m) s += 0.5 * (pi[m + 1] - pi[m - 1]) * pj[static_cast<std::size_t>(j)][m];
      ref.cumulative(i, j) = ref.w[j] * s;
    }
  }

  // Barycentric first-derivative matrix, squared.
  Vec lam(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) prod *= (ref.x[j] - ref.x[k]);
    lam[j] = 1.0 / prod;
  }
  Mat d = Mat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) continue;
      d(i, j) = (lam[j] / lam[i]) / (ref.x[i] - ref.x[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  ref.second_derivative = d * d;
  return ref;
}

const ReferencePanel& reference_panel(std::size_t order) {
  // Grids are built from one thread at a time in practice, but keep the cache per thread so
  // concurrent construction stays safe.
  thread_local std::map<std::size_t, ReferencePanel> cache;
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_reference(order)).first;
  return it->second;
}

}  // namespace

void gauss_legendre(std::size_t order, Vec& x, Vec& w) {
  require(order >= 1, "Gauss-Legendre order must be positive");
  const auto n = static_cast<Eigen::Index>(order);
  x.resize(n);
  w.resize(n);
  if (order == 1) {
    x[0] = 0.0;
    w[0] = 2.0;
    return;
  }
  const double nn = static_cast<double>(order);
  for (Eigen::Index i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= order; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * z * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = nn * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (order % 2 == 1) x[n / 2] = 0.0;
}

RadialGrid build_grid(double r_max, std::size_t n, QuadratureRule rule, std::span<const double> breakpoints,
                      bool relax_min_size) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) fail(ErrorKind::InvalidArgument, "r_max must be positive");
  if (n < RadialGrid::kMinNodes && !relax_min_size)
    fail(ErrorKind::InvalidArgument, "grid needs at least 16 nodes, got " + std::to_string(n));
  if (n < 2) fail(ErrorKind::InvalidArgument, "grid needs at least 2 nodes");

  RadialGrid g;
  g.r_max_ = r_max;
  g.rule_ = rule;
  const auto nn = static_cast<Eigen::Index>(n);
  g.nodes_.resize(nn);
  g.weights_.resize(nn);

  if (rule == QuadratureRule::Trapezoid) {
    const double h = r_max / static_cast<double>(n);
    for (Eigen::Index i = 0; i < nn; ++i) {
      g.nodes_[i] = (static_cast<double>(i) + 0.5) * h;
      g.weights_[i] = h;
    }
    g.min_spacing_ = h;
    g.panel_index_.assign(n, 0);
    return g;
  }

  std::vector<double> edges{0.0};
  for (double b : breakpoints)
    if (b > 1e-12 * r_max && b < r_max * (1.0 - 1e-12)) edges.push_back(b);
  edges.push_back(r_max);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double a, double b) { return std::abs(a - b) < 1e-12 * r_max; }),
              edges.end());
  for (std::size_t i = 1; i + 1 < edges.size(); ++i) g.breakpoints_.push_back(edges[i]);

  const std::size_t segments = edges.size() - 1;
  std::size_t panels = (n + RadialGrid::kDefaultPanelOrder - 1) / RadialGrid::kDefaultPanelOrder;
  panels = std::max(panels, segments);
  if (n < 2 * panels)
    fail(ErrorKind::InvalidArgument, "too few nodes (" + std::to_string(n) + ") for the potential breakpoints");

  // Panels per segment: proportional to length, at least one each, largest remainder.
  std::vector<std::size_t> per(segments, 1);
  std::size_t left = panels - segments;
  std::vector<double> share(segments);
  for (std::size_t s = 0; s < segments; ++s)
    share[s] = static_cast<double>(panels) * (edges[s + 1] - edges[s]) / r_max - 1.0;
  while (left > 0) {
    const auto s = static_cast<std::size_t>(std::max_element(share.begin(), share.end()) - share.begin());
    ++per[s];
    share[s] -= 1.0;
    --left;
  }

  const std::size_t base = n / panels;
  std::size_t extra = n % panels;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < segments; ++s) {
    const double width = (edges[s + 1] - edges[s]) / static_cast<double>(per[s]);
    for (std::size_t k = 0; k < per[s]; ++k) {
      Panel p;
      p.a = edges[s] + width * static_cast<double>(k);
      p.b = (k + 1 == per[s]) ? edges[s + 1] : p.a + width;
      p.begin = cursor;
      p.order = base + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
      const auto& ref = reference_panel(p.order);
      const double half = 0.5 * (p.b - p.a);
      const double mid = 0.5 * (p.b + p.a);
      for (std::size_t j = 0; j < p.order; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        g.nodes_[static_cast<Eigen::Index>(cursor + j)] = mid + half * ref.x[jj];
        g.weights_[static_cast<Eigen::Index>(cursor + j)] = half * ref.w[jj];
        g.panel_index_.push_back(g.panels_.size());
      }
      p.cumulative = half * ref.cumulative;
      p.second_derivative = ref.second_derivative / (half * half);
      cursor += p.order;
      g.panels_.push_back(std::move(p));
    }
  }

  g.min_spacing_ = g.nodes_[0];
  for (Eigen::Index i = 1; i < nn; ++i) g.min_spacing_ = std::min(g.min_spacing_, g.nodes_[i] - g.nodes_[i - 1]);
  return g;
}

CVec RadialGrid::second_derivative(const CVec& f) const {
  const auto n = static_cast<Eigen::Index>(size());
  CVec out(n);
  if (panels_.empty()) {
    // Three-point differences on the uniform staggered grid; f(0) = 0 ghost on the left.
    const double h = min_spacing_;
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx left = i > 0 ? f[i - 1] : -f[0];
      const cplx right = i + 1 < n ? f[i + 1] : 2.0 * f[i] - f[i - 1];
      out[i] = (left - 2.0 * f[i] + right) / (h * h);
    }
    return out;
  }
  for (const auto& p : panels_) {
    const auto b = static_cast<Eigen::Index>(p.begin);
    const auto m = static_cast<Eigen::Index>(p.order);
    out.segment(b, m) = p.second_derivative.cast<cplx>() * f.segment(b, m);
  }
  return out;
}

}  // namespace feshbach::radial
