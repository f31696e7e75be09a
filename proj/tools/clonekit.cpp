// Command-line front end for the experiment harness.
//
//   clonekit <experiment> --config <path> [--seed N] [--workers N]
//            [--out <path>] [--format csv|json] [--set key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "clonekit/error.hpp"
#include "clonekit/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reproducible experiments for Gaussian amplifiers and sample cloners"};
  app.set_version_flag("--version", clonekit::version_string());

  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> units;
  std::vector<std::string> overrides;

  std::string ids;
  for (const auto& id : clonekit::experiment_ids()) ids += (ids.empty() ? "" : ", ") + id;
  app.add_option("experiment", experiment, "Experiment id: " + ids)->required();
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "Root seed (overrides the file)");
  app.add_option("--workers", workers, "Worker threads; 0 uses every hardware thread");
  app.add_option("--out", out, "Report path; '-' or unset writes to standard output");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--units", units, "Distance units: l1, or tv (= l1 / 2)")->check(CLI::IsMember({"l1", "tv"}));
  app.add_option("--set", overrides, "Parameter override key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  clonekit::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = clonekit::load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != experiment) {
      throw clonekit::ConfigError("config file is for experiment '" + cfg.experiment + "', not '" + experiment + "'");
    }
    cfg.experiment = experiment;
    for (const auto& o : overrides) clonekit::apply_override(cfg, o);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out) cfg.out = *out;
    if (format) cfg.format = *format;
    if (units) cfg.units = *units;

    const clonekit::Report report = clonekit::run_experiment(cfg);
    clonekit::write_report(report, cfg, std::cout);
    if (report.partial) {
      std::cerr << "clonekit: " << report.status << '\n';
      return kNumericalError;
    }
  } catch (const clonekit::ConfigError& e) {
    std::cerr << "clonekit: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const clonekit::DomainError& e) {
    std::cerr << "clonekit: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const clonekit::NumericalError& e) {
    std::cerr << "clonekit: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return 0;
}
