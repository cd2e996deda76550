// Command-line front end: flags or a JSON config (a manifest also works)
// are turned into an ExperimentConfig and handed to the runner.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "allocvar/config.hpp"
#include "allocvar/runner.hpp"

using namespace allocvar;
using nlohmann::json;

namespace {

struct PolicyFlags {
  std::optional<std::string> kind;
  std::optional<double> a, gamma, beta;
  std::optional<std::int64_t> explore_rounds;
  std::optional<double> switch_alpha;

  void attach(CLI::App* app) {
    app->add_option("--policy", kind, "ucbf, ucb1, ts_bernoulli, ts_gaussian, round_robin, etc, greedy, hybrid");
    add_f(app);
    app->add_option("--explore-rounds", explore_rounds, "ETC exploration rounds per arm");
    app->add_option("--switch-alpha", switch_alpha, "hybrid switch exponent in (0, 1/2)");
  }

  void add_f(CLI::App* app) {
    app->add_option("--f-a", a, "exploration function scale a");
    app->add_option("--f-gamma", gamma, "exploration function power gamma");
    app->add_option("--f-beta", beta, "exploration function log power beta");
  }

  bool has_f() const { return a || gamma || beta; }

  ExplorationFunction f(ExplorationFunction base) const {
    if (a) base.a = *a;
    if (gamma) base.gamma = *gamma;
    if (beta) base.beta = *beta;
    return base;
  }

  void apply(ExperimentConfig& cfg) const {
    if (!kind && !has_f() && !explore_rounds && !switch_alpha) return;
    PolicySpec spec = cfg.policies.empty() ? PolicySpec{} : cfg.policies.front();
    if (kind) {
      try {
        spec = PolicySpec{parse_policy_kind(*kind), {}, {}, {}};
      } catch (const std::exception& e) {
        throw ConfigError("policy.kind", e.what());
      }
    }
    if (has_f() || ((spec.kind == PolicyKind::ucbf || spec.kind == PolicyKind::hybrid) && !spec.f)) {
      spec.f = f(spec.f.value_or(ExplorationFunction::ucb1()));
    }
    if (explore_rounds) spec.explore_rounds = explore_rounds;
    if (switch_alpha) spec.switch_alpha = switch_alpha;
    cfg.policies = {spec};
  }
};

struct InstanceFlags {
  std::vector<double> means;
  std::vector<double> bernoulli;
  std::optional<double> gap;

  void attach(CLI::App* app) {
    app->add_option("--means", means, "unit-variance Gaussian arm means")->delimiter(',');
    app->add_option("--bernoulli", bernoulli, "Bernoulli arm success probabilities")->delimiter(',');
    app->add_option("--gap", gap, "two-armed gap family N(0,1), N(-gap,1)");
  }

  void apply(ExperimentConfig& cfg) const {
    const int given = !means.empty() + !bernoulli.empty() + gap.has_value();
    if (given == 0) return;
    if (given > 1) throw ConfigError("instance", "use only one of --means, --bernoulli, --gap");
    InstanceConfig inst;
    try {
      if (gap) inst.gap_delta = *gap;
      for (double m : means) inst.arms.push_back(ArmDistribution::gaussian(m, 1.0));
      for (double p : bernoulli) inst.arms.push_back(ArmDistribution::bernoulli(p));
    } catch (const std::exception& e) {
      throw ConfigError("instance", e.what());
    }
    cfg.instance = inst;
  }
};

json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  // A manifest carries the resolved config under "config".
  if (j.is_object() && j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"allocvar: bandit allocation-variability experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config or manifest");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", quiet, "suppress progress messages");

  std::optional<std::int64_t> trials;
  std::vector<std::int64_t> horizons;
  std::vector<double> grid, grid_scaled, gammas;
  std::optional<double> delta, rho;
  PolicyFlags policy;
  InstanceFlags instance;

  auto add_trials = [&](CLI::App* sub) { sub->add_option("--trials", trials, "independent trials"); };
  auto add_T = [&](CLI::App* sub, const char* name) {
    sub->add_option(name, horizons, "horizon(s)")->delimiter(',');
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", grid, "absolute delta values in [0, 2]")->delimiter(',');
  };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo allocation statistics for one instance");
  policy.attach(simulate);
  instance.attach(simulate);
  add_T(simulate, "--T");
  add_trials(simulate);

  auto* sweep = app.add_subcommand("sweep-delta", "two-armed gap family over a delta grid");
  policy.attach(sweep);
  add_T(sweep, "--T");
  add_grid(sweep);
  add_trials(sweep);

  auto* pareto = app.add_subcommand("pareto", "grid-worst R and S for f(t) = t^gamma ln t");
  pareto->add_option("--gammas", gammas, "gamma values")->delimiter(',');
  add_T(pareto, "--T");
  add_grid(pareto);
  pareto->add_option("--grid-scaled", grid_scaled, "delta values as multiples of 1/sqrt(T)")->delimiter(',');
  add_trials(pareto);

  auto* fluid = app.add_subcommand("fluid", "solve the fluid pull-count system");
  fluid->add_option("--means", instance.means, "arm means")->delimiter(',');
  add_T(fluid, "--t");
  policy.add_f(fluid);

  auto* pair = app.add_subcommand("pair-check", "two-instance variability lower bound check");
  policy.attach(pair);
  pair->add_option("--delta", delta, "base gap");
  add_T(pair, "--T");
  add_trials(pair);

  auto* example1 = app.add_subcommand("example1", "TS-Bernoulli on two fair coins, histogram of N_1");
  add_trials(example1);

  auto* platform = app.add_subcommand("platform", "grid-worst R + S^rho per policy");
  policy.attach(platform);
  platform->add_option("--rho", rho, "variability exponent rho >= 0");
  add_T(platform, "--T");
  add_grid(platform);
  add_trials(platform);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", "invalid_arguments"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  ExperimentConfig cfg;
  try {
    if (config_path) cfg = config_from_json(load_config_file(*config_path));
    for (auto* sub : app.get_subcommands()) cfg.subcommand = parse_subcommand(sub->get_name());

    if (cfg.subcommand == Subcommand::fluid) {
      if (!instance.means.empty()) cfg.means = instance.means;
      if (policy.has_f()) cfg.f = policy.f(cfg.f.value_or(ExplorationFunction::ucb1()));
    } else {
      policy.apply(cfg);
      instance.apply(cfg);
    }
    if (!horizons.empty()) cfg.T = horizons;
    if (!grid.empty()) cfg.delta_grid = grid;
    if (!grid_scaled.empty()) cfg.delta_grid_scaled = grid_scaled;
    if (!gammas.empty()) cfg.gammas = gammas;
    if (delta) cfg.delta = delta;
    if (rho) cfg.rho = *rho;
    if (trials) cfg.n_trials = trials;
    if (out) cfg.out = *out;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (format) cfg.format = *format;
  } catch (const ConfigError& e) {
    std::cerr << e.to_json().dump() << '\n';
    return 2;
  }

  return run_with_status(cfg, std::cerr, quiet ? nullptr : &std::cerr);
}
