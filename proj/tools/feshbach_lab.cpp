// feshbach-lab: scan | classify | expand | field | selftest --config <path> [--out <prefix>]
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "feshbach/error.hpp"
#include "feshbach/lab.hpp"

int main(int argc, char** argv) {
  using namespace feshbach;
  CLI::App app{"Two-channel threshold resonance laboratory"};
  app.require_subcommand(1, 1);
  std::string config_path, out_prefix, fault;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "configuration file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_prefix, "output path prefix (default: the config's output key)");
  };
  auto* scan = app.add_subcommand("scan", "sweep lambda: CSV rows and resonance report");
  auto* classify = app.add_subcommand("classify", "classify the zero-energy structure at a fixed lambda");
  auto* expand = app.add_subcommand("expand", "verify the low-energy expansion at a fixed lambda");
  auto* field = app.add_subcommand("field", "fit the magnetic-field resonance law");
  auto* selftest = app.add_subcommand("selftest", "run the analytic-oracle suites");
  for (auto* s : {scan, classify, expand, field}) add_common(s, true);
  add_common(selftest, false);
  selftest->add_option("--inject-fault", fault, "fault injection hook (wronskian)")->check(CLI::IsMember({"wronskian"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (selftest->parsed()) {
      cli::SelftestOptions opt;
      opt.corrupt_wronskian = fault == "wronskian";
      if (!config_path.empty()) opt.seed = cli::load_config(config_path).seed;
      return cli::run_selftest(opt, std::cout).exit_code;
    }
    const cli::RunConfig cfg = cli::load_config(config_path);
    const std::string prefix = out_prefix.empty() ? cfg.output : out_prefix;
    cli::RunResult res;
    if (scan->parsed()) res = cli::run_scan(cfg, prefix);
    else if (classify->parsed()) res = cli::run_classify(cfg, prefix);
    else if (expand->parsed()) res = cli::run_expand(cfg, prefix);
    else res = cli::run_field(cfg, prefix);
    std::cout << res.summary << "\n";
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
