#include "allocvar/policies.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "allocvar/errors.hpp"

namespace allocvar {

double ExplorationFunction::operator()(double t) const noexcept {
  if (t < 2.0) t = 2.0;
  return a * std::pow(t, gamma) * std::pow(std::log(t), beta);
}

ExplorationFunction ExplorationFunction::ucb1() noexcept {
  return {std::sqrt(2.0), 0.0, 0.5};
}

// With L = ln t, the log-derivatives (times t) of the three quantities are
//   f:          gamma + beta / L
//   sqrt(t)/f:  (1/2 - gamma) - beta / L
//   f / ln t:   gamma + (beta - 1) / L
// so each condition reduces to a sign check that is monotone in L.
ExplorationReport validate_exploration_function(const ExplorationFunction& f) {
  ExplorationReport report;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double t_min = 3.0;

  if (!std::isfinite(f.a) || !std::isfinite(f.gamma) || !std::isfinite(f.beta)) {
    report.violations.emplace_back("parameters must be finite");
    report.monotone_from = report.rate_guarantee_from = inf;
    return report;
  }
  if (!(f.a > 0.0)) report.violations.emplace_back("f(t) must be positive (a > 0)");

  // Smallest t >= 3 with c0 + c1 / ln t >= 0, or inf if it never holds.
  auto onset = [&](double c0, double c1) {
    const double l3 = std::log(t_min);
    if (c0 + c1 / l3 >= 0.0) {
      // Holds at t = 3; it stays true iff c1 <= 0 or c0 >= 0.
      if (c1 <= 0.0 || c0 >= 0.0) return t_min;
      return inf;  // c0 < 0 < c1 eventually fails; treated as never
    }
    if (c0 > 0.0) return std::max(t_min, std::exp(-c1 / c0));
    if (c0 == 0.0 && c1 >= 0.0) return t_min;
    return inf;
  };

  const double f_from = onset(f.gamma, f.beta);
  const double ratio_from = onset(0.5 - f.gamma, -f.beta);
  const double growth_from = onset(f.gamma, f.beta - 1.0);

  if (f_from == inf) report.violations.emplace_back("f(t) decreasing");
  if (ratio_from == inf) report.violations.emplace_back("sqrt(t)/f(t) decreasing");
  report.monotone_from = std::max(f_from, ratio_from);
  report.rate_guarantee_from = std::max(report.monotone_from, growth_from);

  if (growth_from == inf) {
    report.advisories.emplace_back(
        "f(t)/ln t decreasing: regret and variability rate guarantees do not apply");
  }
  if (report.ok() && report.monotone_from > t_min) {
    std::ostringstream os;
    os << "monotonicity conditions hold only from t = " << report.monotone_from;
    report.advisories.push_back(os.str());
  }
  return report;
}

ExplorationSchedule make_schedule(const ExplorationFunction& f, std::int64_t horizon) {
  if (horizon < 0) throw ParameterError("schedule horizon must be non-negative");
  auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(horizon) + 1);
  for (std::int64_t t = 0; t <= horizon; ++t) {
    (*table)[static_cast<std::size_t>(t)] = f(static_cast<double>(t));
  }
  return table;
}

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::ucbf: return "ucbf";
    case PolicyKind::ucb1: return "ucb1";
    case PolicyKind::ts_bernoulli: return "ts_bernoulli";
    case PolicyKind::ts_gaussian: return "ts_gaussian";
    case PolicyKind::round_robin: return "round_robin";
    case PolicyKind::etc: return "etc";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::hybrid: return "hybrid";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::ucbf, PolicyKind::ucb1, PolicyKind::ts_bernoulli,
                 PolicyKind::ts_gaussian, PolicyKind::round_robin, PolicyKind::etc,
                 PolicyKind::greedy, PolicyKind::hybrid}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown policy kind '" + std::string(name) + "'");
}

void PolicySpec::validate() const {
  const bool needs_f = kind == PolicyKind::ucbf || kind == PolicyKind::hybrid;
  const bool needs_rounds = kind == PolicyKind::etc;
  const bool needs_alpha = kind == PolicyKind::hybrid;
  const std::string name(to_string(kind));

  if (needs_f != f.has_value()) {
    throw ParameterError(name + (needs_f ? ": exploration function required"
                                         : ": exploration function not applicable"));
  }
  if (needs_rounds != explore_rounds.has_value()) {
    throw ParameterError(name + (needs_rounds ? ": explore_rounds required"
                                              : ": explore_rounds not applicable"));
  }
  if (needs_alpha != switch_alpha.has_value()) {
    throw ParameterError(name + (needs_alpha ? ": switch_alpha required"
                                             : ": switch_alpha not applicable"));
  }
  if (f) {
    const auto report = validate_exploration_function(*f);
    if (!report.ok()) throw ParameterError(name + ": " + report.violations.front());
  }
  if (explore_rounds && *explore_rounds < 1) {
    throw ParameterError(name + ": explore_rounds must be >= 1");
  }
  if (switch_alpha && !(*switch_alpha > 0.0 && *switch_alpha < 0.5)) {
    throw ParameterError(name + ": switch_alpha must lie in (0, 1/2)");
  }
}

std::int64_t hybrid_switch_round(std::int64_t horizon, double alpha) {
  const auto tail = static_cast<std::int64_t>(
      std::ceil(std::pow(static_cast<double>(horizon), 0.5 + alpha)));
  return std::max<std::int64_t>(0, horizon - tail);
}

PolicyState::PolicyState(PolicySpec spec, std::size_t num_arms, std::int64_t horizon,
                         ExplorationSchedule schedule)
    : spec_(std::move(spec)),
      num_arms_(num_arms),
      horizon_(horizon),
      counts_(num_arms, 0),
      sums_(num_arms, 0.0),
      means_(num_arms, 0.0),
      inv_sqrt_counts_(num_arms, std::numeric_limits<double>::infinity()),
      scratch_(num_arms, 0.0),
      schedule_(std::move(schedule)) {
  spec_.validate();
  if (num_arms < 1) throw ParameterError("policy state: need at least one arm");
  if (horizon < 1) throw ParameterError("policy state: horizon must be positive");
  if (spec_.f && !schedule_) schedule_ = make_schedule(*spec_.f, horizon_);
  if (spec_.kind == PolicyKind::hybrid) {
    switch_round_ = hybrid_switch_round(horizon_, *spec_.switch_alpha);
  }
}

PolicyState PolicyState::from_history(PolicySpec spec, std::int64_t horizon,
                                      std::vector<std::int64_t> counts,
                                      std::vector<double> sums,
                                      ExplorationSchedule schedule) {
  if (counts.size() != sums.size()) {
    throw ParameterError("policy state: counts and sums differ in length");
  }
  PolicyState state(std::move(spec), counts.size(), horizon, std::move(schedule));
  std::int64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw ParameterError("policy state: negative count");
    total += counts[i];
  }
  state.counts_ = std::move(counts);
  state.sums_ = std::move(sums);
  state.t_ = total + 1;
  for (std::size_t i = 0; i < state.num_arms_; ++i) state.refresh_arm(i);
  return state;
}

void PolicyState::refresh_arm(std::size_t arm) {
  const auto n = static_cast<double>(counts_[arm]);
  if (counts_[arm] > 0) {
    means_[arm] = sums_[arm] / n;
    inv_sqrt_counts_[arm] = 1.0 / std::sqrt(n);
  } else {
    means_[arm] = 0.0;
    inv_sqrt_counts_[arm] = std::numeric_limits<double>::infinity();
  }
}

double PolicyState::f_at(std::int64_t t) const {
  if (schedule_ && t >= 0 && static_cast<std::size_t>(t) < schedule_->size()) {
    return (*schedule_)[static_cast<std::size_t>(t)];
  }
  return (*spec_.f)(static_cast<double>(t));
}

std::pair<double, double> PolicyState::beta_posterior(std::size_t arm) const {
  const double s = sums_.at(arm);
  return {1.0 + s, 1.0 + static_cast<double>(counts_[arm]) - s};
}

double PolicyState::ucb_index(std::size_t arm) const {
  if (!spec_.f) throw StateError("ucb_index: policy has no exploration function");
  return means_.at(arm) + f_at(t_) * inv_sqrt_counts_[arm];
}

std::size_t PolicyState::argmax_random_ties(const std::vector<double>& values,
                                            RandomStream& rng) {
  double best = values[0];
  std::size_t arg = 0;
  std::size_t ties = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > best) {
      best = values[i];
      arg = i;
      ties = 1;
    } else if (values[i] == best) {
      ++ties;
    }
  }
  if (ties == 1) return arg;
  std::size_t pick = rng.index(ties);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == best && pick-- == 0) return i;
  }
  throw InternalError("argmax: tie bookkeeping failed");
}

std::size_t PolicyState::select_arm(RandomStream& rng) {
  if (!initialized()) throw StateError("select_arm: uninitialized policy state");
  if (t_ > horizon_) throw StateError("select_arm: horizon exhausted");
  if (t_ <= static_cast<std::int64_t>(num_arms_)) return static_cast<std::size_t>(t_ - 1);

  switch (spec_.kind) {
    case PolicyKind::ucbf: return select_ucbf(rng);
    case PolicyKind::ucb1: return select_ucb1(rng);
    case PolicyKind::ts_bernoulli: return select_ts_bernoulli(rng);
    case PolicyKind::ts_gaussian: return select_ts_gaussian(rng);
    case PolicyKind::round_robin:
      return static_cast<std::size_t>((t_ - 1) % static_cast<std::int64_t>(num_arms_));
    case PolicyKind::etc: return select_etc(rng);
    case PolicyKind::greedy: return select_greedy(rng);
    case PolicyKind::hybrid: return select_hybrid(rng);
  }
  throw InternalError("select_arm: unhandled policy kind");
}

std::size_t PolicyState::select_ucbf(RandomStream& rng) {
  const double ft = f_at(t_);
  for (std::size_t i = 0; i < num_arms_; ++i) {
    scratch_[i] = means_[i] + ft * inv_sqrt_counts_[i];
  }
  return argmax_random_ties(scratch_, rng);
}

std::size_t PolicyState::select_ucb1(RandomStream& rng) {
  const double log_t = std::log(static_cast<double>(t_));
  for (std::size_t i = 0; i < num_arms_; ++i) {
    scratch_[i] = means_[i] + std::sqrt(2.0 * log_t / static_cast<double>(counts_[i]));
  }
  return argmax_random_ties(scratch_, rng);
}

std::size_t PolicyState::select_greedy(RandomStream& rng) {
  return argmax_random_ties(means_, rng);
}

std::size_t PolicyState::select_ts_bernoulli(RandomStream& rng) {
  for (std::size_t i = 0; i < num_arms_; ++i) {
    const auto [a, b] = beta_posterior(i);
    scratch_[i] = rng.beta(a, b);
  }
  return argmax_random_ties(scratch_, rng);
}

// Flat prior, unit noise variance: posterior N(mean_i, 1/N_i).
std::size_t PolicyState::select_ts_gaussian(RandomStream& rng) {
  for (std::size_t i = 0; i < num_arms_; ++i) {
    scratch_[i] = means_[i] + inv_sqrt_counts_[i] * rng.normal();
  }
  return argmax_random_ties(scratch_, rng);
}

std::size_t PolicyState::select_etc(RandomStream& rng) {
  const auto K = static_cast<std::int64_t>(num_arms_);
  if (t_ <= *spec_.explore_rounds * K) return static_cast<std::size_t>((t_ - 1) % K);
  if (!committed_arm_) committed_arm_ = argmax_random_ties(means_, rng);
  return *committed_arm_;
}

std::size_t PolicyState::select_hybrid(RandomStream& rng) {
  if (t_ <= switch_round_) return select_ucbf(rng);
  const auto K = static_cast<std::int64_t>(num_arms_);
  return static_cast<std::size_t>((t_ - switch_round_ - 1) % K);
}

void PolicyState::update(std::size_t arm, double reward) {
  if (!initialized()) throw StateError("update: uninitialized policy state");
  if (arm >= num_arms_) throw ParameterError("update: arm index out of range");
  ++counts_[arm];
  sums_[arm] += reward;
  refresh_arm(arm);
  ++t_;
}

}  // namespace allocvar
