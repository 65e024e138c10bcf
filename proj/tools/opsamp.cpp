#include "opsamp/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int run(const std::string &path, const std::string &out, std::optional<std::uint64_t> seed, int threads) {
  using opsamp::io::json;
  json cfg;
  try {
    std::ifstream in(path);
    if (!in)
      throw opsamp::Error(opsamp::Error::Kind::config, "cannot open " + path);
    cfg = json::parse(in);
  } catch (const json::exception &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const opsamp::Error &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  opsamp::RunOptions opts;
  opts.seed = seed;
  opts.threads = threads;
  try {
    const opsamp::Report rep = opsamp::run_experiment(cfg, opts);
    opsamp::write_report(rep, out);
    for (const opsamp::Check &c : rep.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (" << c.relation << " "
                << c.threshold << ")\n";
    std::cout << rep.experiment << ": " << (rep.passed() ? "passed" : "FAILED") << " in " << rep.seconds
              << " s, report in " << out << "\n";
    return rep.passed() ? 0 : 2;
  } catch (const opsamp::Error &e) {
    json err = {{"schema", opsamp::kReportSchema},
                {"config", cfg},
                {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}},
                {"passed", false}};
    try {
      std::filesystem::create_directories(out);
      opsamp::io::write_file(out + "/report.json", err.dump(2) + "\n");
    } catch (const std::exception &) {
    }
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"opsamp: operator sampling experiments"};
  app.require_subcommand(1);
  auto *cmd = app.add_subcommand("run", "run one experiment from a JSON config");
  std::string config, out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  cmd->add_option("config", config, "experiment config (JSON)")->required();
  cmd->add_option("--out", out, "output directory");
  cmd->add_option("--seed", seed, "override the config seed");
  cmd->add_option("--threads", threads, "worker threads for trial sweeps")->check(CLI::PositiveNumber);
  auto *list = app.add_subcommand("list", "print experiment names and default configs");
  CLI11_PARSE(app, argc, argv);
  if (list->parsed()) {
    for (const auto &name : opsamp::experiment_names())
      std::cout << opsamp::default_config(name).dump() << "\n";
    return 0;
  }
  return run(config, out, seed, threads);
}
