#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "feshbach/config.hpp"
#include "feshbach/core.hpp"
#include "feshbach/expand.hpp"
#include "feshbach/scan.hpp"

namespace feshbach::cli {

inline constexpr const char* kCsvHeader = "lambda,a_eff,sigma_min,mu_max,case,notes";

struct ScanRow {
  double lambda = 0.0;
  std::optional<double> a_eff;  // empty: POLE
  std::optional<double> sigma_min;
  std::optional<double> mu_max;
  std::string case_label = "Generic";
  std::string notes;
};

/// Fixed-format decimal with 12 significant digits (locale independent).
std::string format_number(double x);
std::string format_row(const ScanRow& row);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string summary;
};

/// Model built from the configuration at the given lambda (grid panels on all breakpoints).
core::ChannelModel build_model(const RunConfig& cfg, double lambda);
/// Model at a lambda that avoids the closed-channel energies; used as a family.
core::ChannelModel build_family(const RunConfig& cfg);

/// One scan row; failures are recorded in the notes and never thrown.
ScanRow scan_row(const core::ChannelModel& family, double lambda, const RunConfig& cfg,
                 const std::vector<double>& criticals);

/// CSV `<prefix>.csv` and report `<prefix>_scan.txt`.
RunResult run_scan(const RunConfig& cfg, const std::string& prefix);
/// Report `<prefix>_classify.txt`.
RunResult run_classify(const RunConfig& cfg, const std::string& prefix);
/// Report `<prefix>_expand.txt`; exit code 2 when a tolerance is missed.
RunResult run_expand(const RunConfig& cfg, const std::string& prefix);
/// Report `<prefix>_field.txt` and samples `<prefix>_field.csv`.
RunResult run_field(const RunConfig& cfg, const std::string& prefix);

struct SelftestOptions {
  bool corrupt_wronskian = false;  // fault injection: perturbs the outgoing solution's derivative
  std::uint64_t seed = 12345;
};
/// Analytic-oracle suites; prints per-suite pass counts; exit code 0 iff all pass, else 1.
RunResult run_selftest(const SelftestOptions& opt, std::ostream& log);

}  // namespace feshbach::cli
