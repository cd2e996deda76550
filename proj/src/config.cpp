#include "allocvar/config.hpp"

#include <algorithm>
#include <cmath>

#include "allocvar/errors.hpp"

namespace allocvar {

using nlohmann::json;

namespace {

struct Subcommands {
  Subcommand cmd;
  std::string_view name;
};

constexpr Subcommands kSubcommands[] = {
    {Subcommand::simulate, "simulate"},     {Subcommand::sweep_delta, "sweep-delta"},
    {Subcommand::pareto, "pareto"},         {Subcommand::fluid, "fluid"},
    {Subcommand::pair_check, "pair-check"}, {Subcommand::example1, "example1"},
    {Subcommand::platform, "platform"},
};

// Reads an optional field, converting type errors into a FieldError.
template <class T>
std::optional<T> get_opt(const json& j, const std::string& key, const std::string& path,
                         std::vector<FieldError>& errors) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    errors.push_back({path, std::string("wrong type: ") + e.what()});
    return std::nullopt;
  }
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected a JSON object");
}

double tuned_gamma(double rho) { return std::max(0.0, (2.0 * rho - 1.0) / (2.0 + 2.0 * rho)); }

}  // namespace

std::string_view to_string(Subcommand cmd) noexcept {
  for (const auto& s : kSubcommands) {
    if (s.cmd == cmd) return s.name;
  }
  return "unknown";
}

Subcommand parse_subcommand(std::string_view name) {
  for (const auto& s : kSubcommands) {
    if (s.name == name) return s.cmd;
  }
  throw ConfigError("subcommand", "unknown subcommand '" + std::string(name) + "'");
}

BanditInstance InstanceConfig::build() const {
  if (gap_delta) return make_gap_instance(*gap_delta, cls);
  return BanditInstance(arms, cls);
}

ConfigError::ConfigError(std::vector<FieldError> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid config";
        for (const auto& e : errors) msg += "; " + e.field + ": " + e.message;
        return msg;
      }()),
      errors_(std::move(errors)) {}

json ConfigError::to_json() const {
  json fields = json::array();
  for (const auto& e : errors_) fields.push_back({{"field", e.field}, {"message", e.message}});
  return {{"error", "invalid_config"}, {"fields", fields}};
}

// ---------------------------------------------------------------- to_json

json to_json(const ArmDistribution& arm) {
  if (arm.kind() == ArmKind::gaussian) {
    return {{"kind", "gaussian"}, {"mean", arm.mean()}, {"scale", arm.scale()}};
  }
  return {{"kind", "bernoulli"}, {"p", arm.p()}};
}

json to_json(const InstanceConfig& inst) {
  json j;
  if (inst.gap_delta) {
    j["gap_family"] = {{"delta", *inst.gap_delta}};
  } else {
    j["arms"] = json::array();
    for (const auto& a : inst.arms) j["arms"].push_back(to_json(a));
  }
  j["M"] = inst.cls.M;
  j["sigma"] = inst.cls.sigma;
  j["Kbar"] = inst.cls.Kbar;
  return j;
}

json to_json(const ExplorationFunction& f) {
  return {{"a", f.a}, {"gamma", f.gamma}, {"beta", f.beta}};
}

json to_json(const PolicySpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind))}};
  if (spec.f) j["f"] = to_json(*spec.f);
  if (spec.explore_rounds) j["explore_rounds"] = *spec.explore_rounds;
  if (spec.switch_alpha) j["switch_alpha"] = *spec.switch_alpha;
  return j;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["subcommand"] = std::string(to_string(cfg.subcommand));
  if (cfg.instance) j["instance"] = to_json(*cfg.instance);
  j["policies"] = json::array();
  for (const auto& p : cfg.policies) j["policies"].push_back(to_json(p));
  j["T"] = cfg.T;
  j["delta_grid"] = cfg.delta_grid;
  j["delta_grid_scaled"] = cfg.delta_grid_scaled;
  j["gammas"] = cfg.gammas;
  j["means"] = cfg.means;
  if (cfg.f) j["f"] = to_json(*cfg.f);
  if (cfg.delta) j["delta"] = *cfg.delta;
  if (cfg.n_trials) j["n_trials"] = *cfg.n_trials;
  j["seed"] = cfg.seed;
  j["rho"] = cfg.rho;
  j["out"] = cfg.out;
  j["threads"] = cfg.threads;
  j["format"] = cfg.format;
  return j;
}

json to_json(const AllocationStats& s) {
  return {{"n_trials", s.n_trials},
          {"T", s.T},
          {"mean_counts", s.mean_counts},
          {"sd_counts", s.sd_counts},
          {"ci_halfwidths", s.ci_halfwidths},
          {"S_T_hat", s.S_T_hat},
          {"R_T_hat", s.R_T_hat},
          {"sd_regret_hat", s.sd_regret_hat},
          {"dispersion_ratio", s.dispersion_ratio},
          {"dispersion_reference", s.dispersion_reference}};
}

// ---------------------------------------------------------------- from_json

InstanceConfig instance_from_json(const json& j, const std::string& field) {
  require_object(j, field);
  std::vector<FieldError> errors;
  InstanceConfig inst;
  if (auto m = get_opt<double>(j, "M", field + ".M", errors)) inst.cls.M = *m;
  if (auto s = get_opt<double>(j, "sigma", field + ".sigma", errors)) inst.cls.sigma = *s;
  if (auto k = get_opt<int>(j, "Kbar", field + ".Kbar", errors)) inst.cls.Kbar = *k;

  const bool has_gap = j.contains("gap_family");
  const bool has_arms = j.contains("arms");
  if (has_gap == has_arms) {
    errors.push_back({field, "exactly one of 'arms' or 'gap_family' is required"});
  } else if (has_gap) {
    const auto& g = j["gap_family"];
    if (!g.is_object()) {
      errors.push_back({field + ".gap_family", "expected an object with 'delta'"});
    } else if (auto d = get_opt<double>(g, "delta", field + ".gap_family.delta", errors)) {
      inst.gap_delta = *d;
      if (!(*d >= 0.0 && *d <= 2.0 * inst.cls.M)) {
        errors.push_back({field + ".gap_family.delta", "delta must lie in [0, 2M]"});
      }
    } else {
      errors.push_back({field + ".gap_family.delta", "missing"});
    }
  } else if (!j["arms"].is_array()) {
    errors.push_back({field + ".arms", "expected an array"});
  } else {
    const auto& arms = j["arms"];
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const std::string path = field + ".arms[" + std::to_string(i) + "]";
      const auto& a = arms[i];
      if (!a.is_object()) {
        errors.push_back({path, "expected an object"});
        continue;
      }
      const auto kind = get_opt<std::string>(a, "kind", path + ".kind", errors).value_or("");
      try {
        if (kind == "gaussian") {
          const auto mean = get_opt<double>(a, "mean", path + ".mean", errors);
          const auto scale = get_opt<double>(a, "scale", path + ".scale", errors).value_or(1.0);
          if (!mean) {
            errors.push_back({path + ".mean", "missing"});
          } else {
            inst.arms.push_back(ArmDistribution::gaussian(*mean, scale));
          }
        } else if (kind == "bernoulli") {
          const auto p = get_opt<double>(a, "p", path + ".p", errors);
          if (!p) {
            errors.push_back({path + ".p", "missing"});
          } else {
            inst.arms.push_back(ArmDistribution::bernoulli(*p));
          }
        } else {
          errors.push_back({path + ".kind", "must be 'gaussian' or 'bernoulli'"});
        }
      } catch (const ParameterError& e) {
        errors.push_back({path, e.what()});
      }
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return inst;
}

ExplorationFunction exploration_from_json(const json& j, const std::string& field) {
  require_object(j, field);
  std::vector<FieldError> errors;
  ExplorationFunction f;
  if (auto a = get_opt<double>(j, "a", field + ".a", errors)) f.a = *a;
  if (auto g = get_opt<double>(j, "gamma", field + ".gamma", errors)) f.gamma = *g;
  if (auto b = get_opt<double>(j, "beta", field + ".beta", errors)) f.beta = *b;
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return f;
}

PolicySpec policy_from_json(const json& j, const std::string& field) {
  require_object(j, field);
  std::vector<FieldError> errors;
  PolicySpec spec;
  const auto kind = get_opt<std::string>(j, "kind", field + ".kind", errors);
  if (!kind) {
    errors.push_back({field + ".kind", "missing"});
    throw ConfigError(std::move(errors));
  }
  try {
    spec.kind = parse_policy_kind(*kind);
  } catch (const ParameterError& e) {
    throw ConfigError(field + ".kind", e.what());
  }
  if (j.contains("f")) {
    try {
      spec.f = exploration_from_json(j["f"], field + ".f");
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  }
  spec.explore_rounds = get_opt<std::int64_t>(j, "explore_rounds", field + ".explore_rounds", errors);
  spec.switch_alpha = get_opt<double>(j, "switch_alpha", field + ".switch_alpha", errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  require_object(j, "config");
  std::vector<FieldError> errors;
  ExperimentConfig cfg;
  auto absorb = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  };

  if (auto s = get_opt<std::string>(j, "subcommand", "subcommand", errors)) {
    absorb([&] { cfg.subcommand = parse_subcommand(*s); });
  } else {
    errors.push_back({"subcommand", "missing"});
  }
  if (j.contains("instance")) absorb([&] { cfg.instance = instance_from_json(j["instance"]); });
  if (j.contains("policy")) absorb([&] { cfg.policies.push_back(policy_from_json(j["policy"])); });
  if (j.contains("policies")) {
    if (!j["policies"].is_array()) {
      errors.push_back({"policies", "expected an array"});
    } else {
      for (std::size_t i = 0; i < j["policies"].size(); ++i) {
        absorb([&] {
          cfg.policies.push_back(policy_from_json(j["policies"][i], "policies[" + std::to_string(i) + "]"));
        });
      }
    }
  }
  if (j.contains("T") && j["T"].is_number()) {
    if (auto t = get_opt<std::int64_t>(j, "T", "T", errors)) cfg.T = {*t};
  } else if (auto t = get_opt<std::vector<std::int64_t>>(j, "T", "T", errors)) {
    cfg.T = *t;
  }
  if (auto v = get_opt<std::vector<double>>(j, "delta_grid", "delta_grid", errors)) cfg.delta_grid = *v;
  if (auto v = get_opt<std::vector<double>>(j, "delta_grid_scaled", "delta_grid_scaled", errors)) {
    cfg.delta_grid_scaled = *v;
  }
  if (auto v = get_opt<std::vector<double>>(j, "gammas", "gammas", errors)) cfg.gammas = *v;
  if (auto v = get_opt<std::vector<double>>(j, "means", "means", errors)) cfg.means = *v;
  if (j.contains("f")) absorb([&] { cfg.f = exploration_from_json(j["f"]); });
  cfg.delta = get_opt<double>(j, "delta", "delta", errors);
  cfg.n_trials = get_opt<std::int64_t>(j, "n_trials", "n_trials", errors);
  if (auto s = get_opt<std::uint64_t>(j, "seed", "seed", errors)) cfg.seed = *s;
  if (auto r = get_opt<double>(j, "rho", "rho", errors)) cfg.rho = *r;
  if (auto o = get_opt<std::string>(j, "out", "out", errors)) cfg.out = *o;
  if (auto t = get_opt<unsigned>(j, "threads", "threads", errors)) cfg.threads = *t;
  if (auto f = get_opt<std::string>(j, "format", "format", errors)) cfg.format = *f;
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

AllocationStats stats_from_json(const json& j) {
  AllocationStats s;
  s.n_trials = j.at("n_trials").get<std::int64_t>();
  s.T = j.at("T").get<std::int64_t>();
  s.mean_counts = j.at("mean_counts").get<std::vector<double>>();
  s.sd_counts = j.at("sd_counts").get<std::vector<double>>();
  s.ci_halfwidths = j.at("ci_halfwidths").get<std::vector<double>>();
  s.S_T_hat = j.at("S_T_hat").get<double>();
  s.R_T_hat = j.at("R_T_hat").get<double>();
  s.sd_regret_hat = j.at("sd_regret_hat").get<double>();
  s.dispersion_ratio = j.at("dispersion_ratio").get<double>();
  s.dispersion_reference = j.at("dispersion_reference").get<double>();
  return s;
}

// ---------------------------------------------------------------- resolve

std::vector<FieldError> validate(const ExperimentConfig& cfg) {
  std::vector<FieldError> errors;
  auto need_single_T = [&](std::int64_t min_T) {
    if (cfg.T.size() != 1) {
      errors.push_back({"T", "exactly one horizon is required"});
    } else if (cfg.T[0] < min_T) {
      errors.push_back({"T", "must be >= " + std::to_string(min_T)});
    }
  };
  auto need_single_policy = [&] {
    if (cfg.policies.size() != 1) errors.push_back({"policies", "exactly one policy is required"});
  };
  auto need_trials = [&] {
    if (!cfg.n_trials || *cfg.n_trials < 2) errors.push_back({"n_trials", "must be >= 2"});
  };
  auto check_grid = [&](const std::vector<double>& grid, const std::string& field) {
    for (double d : grid) {
      if (!(d >= 0.0 && d <= 2.0)) {
        errors.push_back({field, "values must lie in [0, 2]"});
        return;
      }
    }
  };

  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    try {
      cfg.policies[i].validate();
    } catch (const ParameterError& e) {
      errors.push_back({"policies[" + std::to_string(i) + "]", e.what()});
    }
  }
  if (cfg.format != "csv" && cfg.format != "json") errors.push_back({"format", "must be 'csv' or 'json'"});
  if (cfg.out.empty()) errors.push_back({"out", "output directory is required"});

  switch (cfg.subcommand) {
    case Subcommand::simulate:
    case Subcommand::example1: {
      need_single_policy();
      need_trials();
      if (!cfg.instance) {
        errors.push_back({"instance", "required"});
        break;
      }
      const auto report = validate_instance(cfg.instance->build());
      for (const auto& v : report.violations) errors.push_back({"instance", v});
      need_single_T(static_cast<std::int64_t>(cfg.instance->build().size()));
      break;
    }
    case Subcommand::sweep_delta:
      need_single_policy();
      need_single_T(2);
      need_trials();
      if (cfg.delta_grid.empty()) errors.push_back({"delta_grid", "must not be empty"});
      check_grid(cfg.delta_grid, "delta_grid");
      break;
    case Subcommand::pareto:
      need_trials();
      if (cfg.gammas.empty()) errors.push_back({"gammas", "must not be empty"});
      for (double g : cfg.gammas) {
        const auto rep = validate_exploration_function(ExplorationFunction::power_log(g));
        if (!rep.ok()) errors.push_back({"gammas", "gamma " + std::to_string(g) + ": " + rep.violations.front()});
      }
      if (cfg.T.empty()) errors.push_back({"T", "at least one horizon is required"});
      for (auto t : cfg.T) {
        if (t < 2) errors.push_back({"T", "horizons must be >= 2"});
      }
      check_grid(cfg.delta_grid, "delta_grid");
      for (auto t : cfg.T) {
        if (t < 1) continue;
        for (double m : cfg.delta_grid_scaled) {
          if (!(m >= 0.0 && m / std::sqrt(static_cast<double>(t)) <= 2.0)) {
            errors.push_back({"delta_grid_scaled", "resolved values must lie in [0, 2]"});
            break;
          }
        }
      }
      break;
    case Subcommand::fluid: {
      if (cfg.means.size() < 2) errors.push_back({"means", "at least two means are required"});
      for (double m : cfg.means) {
        if (!std::isfinite(m)) errors.push_back({"means", "means must be finite"});
      }
      if (!cfg.f) {
        errors.push_back({"f", "required"});
      } else if (!(cfg.f->a > 0.0) || !std::isfinite(cfg.f->gamma) || !std::isfinite(cfg.f->beta)) {
        errors.push_back({"f", "a must be positive and exponents finite"});
      }
      if (cfg.T.empty()) errors.push_back({"T", "at least one budget t is required"});
      for (std::size_t k = 0; k < cfg.T.size(); ++k) {
        if (cfg.T[k] < static_cast<std::int64_t>(cfg.means.size())) {
          errors.push_back({"T", "every t must be >= K"});
          break;
        }
        if (k > 0 && cfg.T[k] <= cfg.T[k - 1]) {
          errors.push_back({"T", "t grid must be strictly increasing"});
          break;
        }
      }
      break;
    }
    case Subcommand::pair_check:
      need_single_policy();
      need_single_T(2);
      need_trials();
      if (!cfg.delta) {
        errors.push_back({"delta", "required"});
      } else if (!(*cfg.delta >= 0.0 && *cfg.delta <= 2.0)) {
        errors.push_back({"delta", "must lie in [0, 2]"});
      }
      break;
    case Subcommand::platform:
      if (cfg.policies.empty()) errors.push_back({"policies", "at least one policy is required"});
      need_single_T(2);
      need_trials();
      if (!(cfg.rho >= 0.0)) errors.push_back({"rho", "must be >= 0"});
      if (cfg.delta_grid.empty()) errors.push_back({"delta_grid", "must not be empty"});
      check_grid(cfg.delta_grid, "delta_grid");
      break;
  }
  return errors;
}

ExperimentConfig resolve(ExperimentConfig cfg) {
  if (!cfg.n_trials) cfg.n_trials = cfg.subcommand == Subcommand::example1 ? 20000 : 10000;
  switch (cfg.subcommand) {
    case Subcommand::example1:
      if (!cfg.instance) {
        cfg.instance = InstanceConfig{{}, {ArmDistribution::bernoulli(0.5), ArmDistribution::bernoulli(0.5)}, {}};
      }
      if (cfg.policies.empty()) cfg.policies = {PolicySpec::ts_bernoulli()};
      if (cfg.T.empty()) cfg.T = {5000};
      break;
    case Subcommand::sweep_delta:
    case Subcommand::platform:
      if (cfg.subcommand == Subcommand::sweep_delta && cfg.policies.empty()) {
        cfg.policies = {PolicySpec::ucbf(ExplorationFunction::ucb1())};
      }
      if (cfg.delta_grid.empty() && cfg.T.size() == 1 && cfg.T[0] > 0) {
        cfg.delta_grid = DeltaGrid::standard().resolve(cfg.T[0]);
      }
      if (cfg.subcommand == Subcommand::platform && cfg.policies.empty()) {
        cfg.policies = {PolicySpec::ucbf(ExplorationFunction::power_log(tuned_gamma(cfg.rho))),
                        PolicySpec::ucbf(ExplorationFunction::power_log(0.0)),
                        PolicySpec::round_robin()};
      }
      break;
    case Subcommand::pareto:
      if (cfg.delta_grid.empty() && cfg.delta_grid_scaled.empty()) {
        const auto grid = DeltaGrid::standard();
        cfg.delta_grid_scaled = grid.root_t_multiples;
        cfg.delta_grid = grid.absolute;
      }
      break;
    case Subcommand::fluid:
      if (!cfg.f) cfg.f = ExplorationFunction::ucb1();
      break;
    case Subcommand::simulate:
    case Subcommand::pair_check:
      if (cfg.policies.empty()) cfg.policies = {PolicySpec::ucbf(ExplorationFunction::ucb1())};
      break;
  }
  if (auto errors = validate(cfg); !errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

}  // namespace allocvar
