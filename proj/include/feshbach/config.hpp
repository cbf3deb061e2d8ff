#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "feshbach/grid.hpp"
#include "feshbach/potential.hpp"

namespace feshbach::cli {

struct SweepConfig {
  double min = 0.02;
  std::optional<double> max;  // defaults to 4 |E_0|
  int points = 200;
};

struct FieldConfig {
  double slope = 1.0;
  double offset = 0.0;
  double B_min = 0.0;
  double B_max = 1.0;
  int samples = 41;
};

struct GridConfig {
  double r_max = 25.0;
  std::size_t n = 600;
  radial::QuadratureRule rule = radial::QuadratureRule::GaussLegendre;
};

struct RunConfig {
  radial::Potential V;
  radial::Potential U;
  radial::Potential W;  // the full coupling, W1 + beta W2
  radial::Potential W1;
  radial::Potential W2;
  double beta = 0.0;
  std::optional<double> lambda;
  SweepConfig sweep;
  GridConfig grid;
  double k0 = 0.1;
  int richardson_terms = 6;
  int k_count = 7;
  std::optional<FieldConfig> field;
  std::uint64_t seed = 12345;
  std::string output = "feshbach";
  std::string text;  // the exact configuration text
};

/// Parses a potential: terms joined by '+', each `[coef *] family strength range [sign]`,
/// family one of square_well, square_barrier, gaussian, exponential, poschl_teller; or `zero`.
radial::Potential parse_potential(std::string_view text);
std::string format_potential(const radial::Potential& p);

/// Line-oriented `[section]` / `key = value` text; `#` starts a comment.
/// Sections: [model] (v, u, w, w2, beta, lambda, seed, output), [grid] (r_max, n, rule),
/// [scan] (min, max, points, k0, richardson_terms, k_count), [field] (slope, offset, b_min,
/// b_max, samples). Throws Error(Config) naming the offending key and line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace feshbach::cli
