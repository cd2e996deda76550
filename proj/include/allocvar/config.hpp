#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "allocvar/env.hpp"
#include "allocvar/policies.hpp"
#include "allocvar/sim.hpp"

namespace allocvar {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Subcommand { simulate, sweep_delta, pareto, fluid, pair_check, example1, platform };

std::string_view to_string(Subcommand cmd) noexcept;
Subcommand parse_subcommand(std::string_view name);

/// Either explicit arms or the two-armed gap family shorthand.
struct InstanceConfig {
  std::optional<double> gap_delta;
  std::vector<ArmDistribution> arms;
  InstanceClass cls;

  BanditInstance build() const;
  bool operator==(const InstanceConfig&) const = default;
};

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::simulate;
  std::optional<InstanceConfig> instance;
  std::vector<PolicySpec> policies;
  std::vector<std::int64_t> T;
  std::vector<double> delta_grid;
  /// Pareto only: grid entries given as multiples of 1/sqrt(T).
  std::vector<double> delta_grid_scaled;
  std::vector<double> gammas;
  /// Fluid only.
  std::vector<double> means;
  std::optional<ExplorationFunction> f;
  /// Pair-check only.
  std::optional<double> delta;
  /// Defaults to 20000 for example1 and 10000 elsewhere.
  std::optional<std::int64_t> n_trials;
  std::uint64_t seed = 0;
  double rho = 1.0;
  std::string out = "out";
  unsigned threads = 0;
  std::string format = "csv";

  bool operator==(const ExperimentConfig&) const = default;
};

/// One problem with one config field.
struct FieldError {
  std::string field;
  std::string message;
};

/// Field-level diagnostics, all collected before reporting.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<FieldError> errors);
  ConfigError(std::string field, std::string message)
      : ConfigError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}
  const std::vector<FieldError>& errors() const noexcept { return errors_; }
  nlohmann::json to_json() const;

 private:
  std::vector<FieldError> errors_;
};

/// Fills subcommand presets (example1, default grids) and reports every
/// invalid field at once. Throws ConfigError.
ExperimentConfig resolve(ExperimentConfig cfg);
std::vector<FieldError> validate(const ExperimentConfig& cfg);

// JSON mapping. Parsing throws ConfigError naming the offending field.
nlohmann::json to_json(const ArmDistribution& arm);
nlohmann::json to_json(const InstanceConfig& inst);
nlohmann::json to_json(const ExplorationFunction& f);
nlohmann::json to_json(const PolicySpec& spec);
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const AllocationStats& stats);

InstanceConfig instance_from_json(const nlohmann::json& j, const std::string& field = "instance");
ExplorationFunction exploration_from_json(const nlohmann::json& j, const std::string& field = "f");
PolicySpec policy_from_json(const nlohmann::json& j, const std::string& field = "policy");
ExperimentConfig config_from_json(const nlohmann::json& j);
AllocationStats stats_from_json(const nlohmann::json& j);

}  // namespace allocvar
