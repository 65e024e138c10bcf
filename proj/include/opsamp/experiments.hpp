#pragma once

#include "opsamp/io.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace opsamp {

inline constexpr const char *kReportSchema = "opsamp-report/1";

// Numeric table written as CSV with a fixed number format, so reruns are byte-identical.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string csv() const;
  io::json to_json() const;
};

struct Check {
  std::string name;
  double value = 0;
  double threshold = 0;
  std::string relation;   // "<=", ">=", "<", "true"
  bool pass = false;
};

struct Report {
  std::string experiment;
  io::json config;
  Table metrics;
  std::map<std::string, Table> plots;
  std::map<std::string, std::string> artifacts;   // file name -> contents
  io::json summary = io::json::object();
  std::vector<Check> checks;
  double seconds = 0;

  bool passed() const;
  io::json to_json() const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

const std::vector<std::string> &experiment_names();
io::json default_config(const std::string &experiment);
// Fills missing keys from the experiment's defaults and validates; throws Error(config).
io::json resolve_config(const io::json &config, const RunOptions &opts = {});
Report run_experiment(const io::json &config, const RunOptions &opts = {});
// Writes report.json, metrics.csv, plot_<name>.csv and artifacts into dir.
void write_report(const Report &r, const std::string &dir);

// Runs fn(0..n-1) on up to `threads` workers; results must be stored by index.
void parallel_for(Index n, int threads, const std::function<void(Index)> &fn);
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

} // namespace opsamp
