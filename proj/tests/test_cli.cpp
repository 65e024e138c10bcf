#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string bin() {
  const char *b = std::getenv("OPSAMP_BIN");
  return b ? b : "opsamp";
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("opsamp_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string &args) {
  std::string cmd = "\"" + bin() + "\" " + args + " > /dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string &name, const json &j) {
  fs::path p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json nodecay() {
  return {{"experiment", "nodecay-demo"}};
}

} // namespace

TEST_CASE("a passing run writes a versioned report") {
  fs::path cfg = write_config("nodecay.json", nodecay());
  fs::path out = scratch() / "ok";
  CHECK(run("run " + cfg.string() + " --out " + out.string()) == 0);
  json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep.at("schema") == "opsamp-report/1");
  CHECK(rep.at("experiment") == "nodecay-demo");
  CHECK(rep.at("passed") == true);
  CHECK(rep.at("config").contains("seed"));
  CHECK(fs::exists(out / "metrics.csv"));
  for (const auto &p : rep.at("files").at("plots"))
    CHECK(fs::exists(out / p.get<std::string>()));
}

TEST_CASE("config errors exit with 1") {
  CHECK(run("run " + (scratch() / "missing.json").string() + " --out " + (scratch() / "e0").string()) == 1);
  fs::path junk = scratch() / "junk.json";
  std::ofstream(junk) << "{ not json";
  CHECK(run("run " + junk.string() + " --out " + (scratch() / "e1").string()) == 1);
  json unknown = nodecay();
  unknown["no_such_key"] = 1;
  CHECK(run("run " + write_config("unknown.json", unknown).string() + " --out " + (scratch() / "e2").string()) ==
        1);
  CHECK(run("run " + write_config("noexp.json", {{"experiment", "nope"}}).string() + " --out " +
            (scratch() / "e3").string()) == 1);
  json badval = nodecay();
  badval["seed"] = -4;
  fs::path e4 = scratch() / "e4";
  CHECK(run("run " + write_config("badval.json", badval).string() + " --out " + e4.string()) == 1);
}

TEST_CASE("failed acceptance checks exit with 2") {
  // A near-zero decay guard makes the no-decay tail check fail.
  json cfg = nodecay();
  cfg["decay_radius"] = 0.0;
  fs::path out = scratch() / "fail";
  int code = run("run " + write_config("fail.json", cfg).string() + " --out " + out.string());
  CHECK(code == 2);
  if (code == 2)
    CHECK(json::parse(slurp(out / "report.json")).at("passed") == false);
}

TEST_CASE("output is deterministic per seed") {
  json cfg = {{"experiment", "local-subset"}};
  fs::path p = write_config("local.json", cfg);
  fs::path a = scratch() / "da", b = scratch() / "db", c = scratch() / "dc", d = scratch() / "dd";
  REQUIRE(run("run " + p.string() + " --out " + a.string()) == 0);
  REQUIRE(run("run " + p.string() + " --out " + b.string() + " --threads 2") == 0);
  REQUIRE(run("run " + p.string() + " --out " + c.string() + " --seed 99") == 0);
  REQUIRE(run("run " + p.string() + " --out " + d.string() + " --seed 99") == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(c / "metrics.csv") == slurp(d / "metrics.csv"));
  CHECK(slurp(a / "metrics.csv") != slurp(c / "metrics.csv"));
  json rc = json::parse(slurp(c / "report.json"));
  CHECK(rc.at("config").at("seed") == 99);
  json ra = json::parse(slurp(a / "report.json")), rb = json::parse(slurp(b / "report.json"));
  CHECK(ra.at("summary") == rb.at("summary"));
}

TEST_CASE("list prints every default config") {
  fs::path out = scratch() / "list.txt";
  std::string cmd = "\"" + bin() + "\" list > " + out.string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::stringstream ss(slurp(out));
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    json j = json::parse(line);
    CHECK(j.contains("experiment"));
    ++n;
  }
  CHECK(n == 8);
}
