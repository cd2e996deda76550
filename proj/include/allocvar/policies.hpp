#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allocvar/rng.hpp"

namespace allocvar {

/// f(t) = a * t^gamma * (ln t)^beta for t >= 2, clamped to f(2) below.
struct ExplorationFunction {
  double a = 1.0;
  double gamma = 0.0;
  double beta = 0.5;

  double operator()(double t) const noexcept;

  /// The UCB1 bonus sqrt(2 ln t).
  static ExplorationFunction ucb1() noexcept;
  /// t^gamma ln t, the tunable family used for frontier sweeps.
  static ExplorationFunction power_log(double gamma) noexcept { return {1.0, gamma, 1.0}; }

  bool operator==(const ExplorationFunction&) const = default;
};

/// Result of checking the monotonicity conditions on f.
///
/// `violations` are blocking: f must be positive, eventually non-decreasing,
/// and sqrt(t)/f(t) must be eventually non-decreasing. The stronger growth
/// condition that f(t)/ln t be non-decreasing is reported in `advisories`;
/// it is what the O(sqrt(T) f(T)) / O(T log T / f(T)) rate guarantee needs,
/// and it fails for the UCB1 bonus.
struct ExplorationReport {
  std::vector<std::string> violations;
  std::vector<std::string> advisories;
  /// First t >= 3 from which f and sqrt(t)/f(t) are both non-decreasing.
  double monotone_from = 3.0;
  /// First t >= 3 from which f(t)/ln t is also non-decreasing (inf if never).
  double rate_guarantee_from = 3.0;

  bool ok() const noexcept { return violations.empty(); }
};

ExplorationReport validate_exploration_function(const ExplorationFunction& f);

/// f(t) precomputed for t = 0..horizon; index by round. Shared read-only.
using ExplorationSchedule = std::shared_ptr<const std::vector<double>>;

ExplorationSchedule make_schedule(const ExplorationFunction& f, std::int64_t horizon);

enum class PolicyKind {
  ucbf,
  ucb1,
  ts_bernoulli,
  ts_gaussian,
  round_robin,
  etc,
  greedy,
  hybrid,
};

std::string_view to_string(PolicyKind kind) noexcept;
PolicyKind parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::round_robin;
  std::optional<ExplorationFunction> f;      // ucbf, hybrid
  std::optional<std::int64_t> explore_rounds;  // etc
  std::optional<double> switch_alpha;        // hybrid

  static PolicySpec ucbf(ExplorationFunction f) { return {PolicyKind::ucbf, f, {}, {}}; }
  static PolicySpec ucb1() { return {PolicyKind::ucb1, {}, {}, {}}; }
  static PolicySpec ts_bernoulli() { return {PolicyKind::ts_bernoulli, {}, {}, {}}; }
  static PolicySpec ts_gaussian() { return {PolicyKind::ts_gaussian, {}, {}, {}}; }
  static PolicySpec round_robin() { return {PolicyKind::round_robin, {}, {}, {}}; }
  static PolicySpec etc(std::int64_t rounds) { return {PolicyKind::etc, {}, rounds, {}}; }
  static PolicySpec greedy() { return {PolicyKind::greedy, {}, {}, {}}; }
  static PolicySpec hybrid(ExplorationFunction f, double alpha) {
    return {PolicyKind::hybrid, f, {}, alpha};
  }

  /// Throws ParameterError unless the kind-specific fields are present
  /// exactly when required and in range.
  void validate() const;

  bool operator==(const PolicySpec&) const = default;
};

/// Round at which the hybrid policy hands over to round-robin: rounds
/// t <= hybrid_switch_round(T, alpha) run UCB-f, the final ceil(T^{1/2+alpha})
/// rounds run round-robin.
std::int64_t hybrid_switch_round(std::int64_t horizon, double alpha);

/// Per-trial mutable state of a policy: pull counts, reward sums and the
/// 1-based round counter, plus whatever the policy kind needs.
///
/// Arms are 0-based here; arm i corresponds to arm i+1 in the usual notation.
/// Every kind opens with an initialization sweep (round t <= K pulls arm t).
class PolicyState {
 public:
  PolicyState() = default;
  PolicyState(PolicySpec spec, std::size_t num_arms, std::int64_t horizon,
              ExplorationSchedule schedule = nullptr);

  /// Rebuilds a state mid-run from counts and reward sums; the round counter
  /// becomes sum(counts) + 1.
  static PolicyState from_history(PolicySpec spec, std::int64_t horizon,
                                  std::vector<std::int64_t> counts,
                                  std::vector<double> sums,
                                  ExplorationSchedule schedule = nullptr);

  std::size_t select_arm(RandomStream& rng);
  void update(std::size_t arm, double reward);

  bool initialized() const noexcept { return num_arms_ > 0; }
  std::size_t num_arms() const noexcept { return num_arms_; }
  std::int64_t horizon() const noexcept { return horizon_; }
  /// Round about to be played (1-based).
  std::int64_t round() const noexcept { return t_; }
  const PolicySpec& spec() const noexcept { return spec_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  const std::vector<double>& sums() const noexcept { return sums_; }
  double empirical_mean(std::size_t arm) const { return means_.at(arm); }
  /// Beta posterior (alpha, beta) of a Bernoulli Thompson arm.
  std::pair<double, double> beta_posterior(std::size_t arm) const;
  /// UCB index mean + f(t)/sqrt(N) evaluated at the current round.
  double ucb_index(std::size_t arm) const;

 private:
  std::size_t select_ucbf(RandomStream& rng);
  std::size_t select_ucb1(RandomStream& rng);
  std::size_t select_greedy(RandomStream& rng);
  std::size_t select_ts_bernoulli(RandomStream& rng);
  std::size_t select_ts_gaussian(RandomStream& rng);
  std::size_t select_etc(RandomStream& rng);
  std::size_t select_hybrid(RandomStream& rng);
  std::size_t argmax_random_ties(const std::vector<double>& values, RandomStream& rng);
  double f_at(std::int64_t t) const;
  void refresh_arm(std::size_t arm);

  PolicySpec spec_;
  std::size_t num_arms_ = 0;
  std::int64_t horizon_ = 0;
  std::int64_t t_ = 1;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
  std::vector<double> means_;
  std::vector<double> inv_sqrt_counts_;
  std::vector<double> scratch_;
  ExplorationSchedule schedule_;
  std::optional<std::size_t> committed_arm_;
  std::int64_t switch_round_ = 0;
  std::int64_t rr_counter_ = 0;
};

}  // namespace allocvar
