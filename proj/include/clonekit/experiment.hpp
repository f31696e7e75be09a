#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace clonekit {

/// Experiments the harness knows how to run.
const std::vector<std::string>& experiment_ids();

/// Version string baked in at build time (project version plus git describe).
std::string version_string();

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int workers = 0;  ///< 0 means one per hardware thread
  std::optional<std::string> out;
  std::string format = "csv";
  std::string units = "l1";  ///< "l1" or "tv" (= l1 / 2, display only)
  /// Experiment parameters as written; parsed and defaulted by run_experiment.
  std::map<std::string, std::string> params;
};

/// Parses a key = value file. Lines starting with '#' or ';' are comments.
/// Keys in a [run] section (or before any section) named experiment, seed,
/// workers, out, format or units configure the run; everything else is an
/// experiment parameter. Throws ConfigError with the line number on bad input.
ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Applies a "key=value" override, as from the command line.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Column {
  std::string name;
  std::string description;
  bool distance = false;  ///< an L1 quantity, rescaled when units = tv
  bool operator==(const Column&) const = default;
};

struct Report {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;  ///< resolved, defaults filled
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  bool partial = false;       ///< a numerical failure cut the run short
  std::string status = "ok";  ///< free-text status when partial
  std::string version;
  double wall_clock_seconds = 0.0;
  bool operator==(const Report&) const = default;
};

/// Runs the configured experiment. Throws ConfigError for invalid
/// configurations (including unknown parameters). Numerical failures that
/// still leave usable output (an LP iteration limit) set `partial`.
Report run_experiment(const ExperimentConfig& cfg);

/// CSV: '#' comment lines (title, resolved config, column descriptions), a
/// header row, then data rows with 17-significant-digit floats. Contains no
/// timing or version data, so reruns are byte-identical.
/// Throws ConfigError on an empty report.
std::string emit_csv(const Report& report);
/// JSON with "schema": 1. Throws ConfigError on an empty report.
std::string emit_json(const Report& report);
Report parse_json_report(const std::string& text);

/// Writes the report in cfg.format to cfg.out (or stdout when unset).
/// Throws ConfigError when the path cannot be written.
void write_report(const Report& report, const ExperimentConfig& cfg, std::ostream& fallback);

}  // namespace clonekit
