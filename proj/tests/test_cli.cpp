#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "allocvar/report.hpp"
#include "allocvar/runner.hpp"

using namespace allocvar;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(ALLOCVAR_TEST_SCRATCH) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ALLOCVAR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_header(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string c; std::getline(is, c, ',');) out.push_back(c);
  return out;
}

}  // namespace

TEST_CASE("runner writes manifest and results") {
  const auto out = scratch("simulate");
  ExperimentConfig cfg;
  cfg.subcommand = Subcommand::simulate;
  cfg.instance = InstanceConfig{0.1, {}, {}};
  cfg.policies = {PolicySpec::ucbf(ExplorationFunction::ucb1())};
  cfg.T = {500};
  cfg.n_trials = 40;
  cfg.seed = 3;
  cfg.out = out.string();
  const auto written = run(cfg);
  CHECK(written.size() == 3);
  CHECK(fs::exists(out / "results.csv"));
  CHECK(fs::exists(out / "histogram.csv"));
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["version"] == std::string(kVersion));
  CHECK(manifest["config"]["seed"] == 3);
  CHECK(config_from_json(manifest["config"]) == resolve(cfg));
}

TEST_CASE("outputs are reproducible from the manifest alone") {
  const auto a = scratch("manifest_a");
  ExperimentConfig cfg;
  cfg.subcommand = Subcommand::sweep_delta;
  cfg.T = {300};
  cfg.n_trials = 30;
  cfg.seed = 11;
  cfg.out = a.string();
  run(cfg);
  auto replay = config_from_json(json::parse(slurp(a / "manifest.json"))["config"]);
  const auto b = scratch("manifest_b");
  replay.out = b.string();
  run(replay);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "sweep.json") == slurp(b / "sweep.json"));
}

TEST_CASE("exit status and error json") {
  std::ostringstream err;
  ExperimentConfig bad;
  bad.subcommand = Subcommand::fluid;
  bad.means = {0.0};
  bad.out = scratch("bad").string();
  CHECK(run_with_status(bad, err) == 2);
  const auto j = json::parse(err.str());
  CHECK(j["error"] == "invalid_config");
  CHECK(j["fields"][0]["field"] == "means");

  ExperimentConfig unwritable;
  unwritable.subcommand = Subcommand::fluid;
  unwritable.means = {0.0, 0.0};
  unwritable.T = {100};
  const auto blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "x";
  unwritable.out = (blocker / "sub").string();
  std::ostringstream err2;
  CHECK(run_with_status(unwritable, err2) == 2);
  CHECK(json::parse(err2.str())["fields"][0]["field"] == "out");
}

TEST_CASE("checkpoints resume a sweep") {
  const auto out = scratch("resume");
  ExperimentConfig cfg;
  cfg.subcommand = Subcommand::pareto;
  cfg.gammas = {0.0, 0.25};
  cfg.T = {64, 128};
  cfg.n_trials = 10;
  cfg.out = out.string();
  run(cfg);
  const auto first = slurp(out / "frontier.csv");
  std::size_t n_ckpt = 0;
  for (const auto& e : fs::directory_iterator(out / "checkpoints")) n_ckpt += e.path().extension() == ".json";
  CHECK(n_ckpt > 0);
  run(cfg);
  CHECK(slurp(out / "frontier.csv") == first);
}

TEST_CASE("cli: fluid example") {
  const auto out = scratch("cli_fluid");
  REQUIRE(cli("fluid --means 0,0 --t 100 --f-gamma 0 --f-beta 0.5 --f-a 1.4142 --out " + out.string()) == 0);
  std::ifstream f(out / "fluid.csv");
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header == "t,f_t,lambda,n_1,n_2,residual");
  std::vector<double> cells;
  std::istringstream is(row);
  for (std::string c; std::getline(is, c, ',');) cells.push_back(std::stod(c));
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == 100.0);
  CHECK(cells[3] == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(cells[4] == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("cli: exit codes") {
  CHECK(cli("--version") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("simulate --policy exp3 --out " + scratch("x1").string()) == 2);
  CHECK(cli("sweep-delta --T 100 --grid 3 --out " + scratch("x2").string()) == 2);
  CHECK(cli("fluid --means 0,0 --t 100 --format yaml") == 2);
  CHECK(cli("simulate --config /nonexistent/config.json") == 2);
  const auto out = scratch("cli_bad_config");
  fs::create_directories(out);
  std::ofstream(out / "c.json") << R"({"subcommand":"fluid","means":[0,-1],"T":[10,5]})";
  CHECK(cli("fluid --config " + (out / "c.json").string() + " --out " + out.string()) == 2);
  CHECK(json::parse(slurp(out / "error.json"))["fields"][0]["field"] == "T");
}

TEST_CASE("cli: config file and flag overrides") {
  const auto out = scratch("cli_config");
  fs::create_directories(out);
  std::ofstream(out / "c.json") << R"({"subcommand":"simulate","instance":{"gap_family":{"delta":0.2}},
    "policy":{"kind":"ucbf","f":{"a":1,"gamma":0.125,"beta":1}},"T":256,"n_trials":20,"seed":1})";
  REQUIRE(cli("simulate --config " + (out / "c.json").string() + " --seed 9 --out " + out.string()) == 0);
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["config"]["seed"] == 9);
  CHECK(manifest["config"]["policies"][0]["f"]["gamma"] == 0.125);
  // A manifest is itself a valid config.
  const auto again = scratch("cli_config_again");
  REQUIRE(cli("simulate --config " + (out / "manifest.json").string() + " --out " + again.string()) == 0);
  CHECK(slurp(out / "results.csv") == slurp(again / "results.csv"));
}

TEST_CASE("cli: json format") {
  const auto out = scratch("cli_json");
  REQUIRE(cli("pair-check --policy round_robin --delta 0.1 --T 100 --trials 10 --format json --out " +
              out.string()) == 0);
  const auto rep = json::parse(slurp(out / "pair_check.json"));
  CHECK(rep["lemma_holds"] == true);
  CHECK(rep["g_hat"][0] == 50.0);
}

TEST_CASE("cli: small example1 run is byte-stable") {
  const auto a = scratch("ex1_a");
  const auto b = scratch("ex1_b");
  REQUIRE(cli("example1 --seed 7 --trials 500 --out " + a.string()) == 0);
  REQUIRE(cli("example1 --seed 7 --trials 500 --threads 3 --out " + b.string()) == 0);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "histogram.csv") == slurp(b / "histogram.csv"));
  CHECK(csv_header(a / "histogram.csv") == std::vector<std::string>{"bin_left", "bin_right", "count"});
}

TEST_CASE("cli: pareto schema handshake") {
  const auto out = scratch("cli_pareto");
  REQUIRE(cli("pareto --gammas 0,0.125,0.25 --T 64,256 --trials 20 --seed 1 --out " + out.string()) == 0);
  CHECK(csv_header(out / "frontier.csv") == frontier_columns());
  CHECK(csv_header(out / "slopes.csv") == slopes_columns());
  CHECK(csv_header(out / "results.csv") == results_columns());
  std::ifstream f(out / "frontier.csv");
  std::string line;
  int rows = -1;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("cli: platform") {
  const auto out = scratch("cli_platform");
  REQUIRE(cli("platform --rho 1 --T 256 --trials 20 --out " + out.string()) == 0);
  std::ifstream f(out / "platform.csv");
  std::string line;
  int rows = -1;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 3);
}
