#include "allocvar/theory.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "allocvar/env.hpp"
#include "allocvar/errors.hpp"
#include "allocvar/sim.hpp"
#include "allocvar/stats.hpp"

namespace allocvar {

double kl_gaussian(double mu, double mu_prime) noexcept {
  const double d = mu - mu_prime;
  return 0.5 * d * d;
}

double divergence_decomposition(double delta, double delta_prime, double g, std::int64_t T) {
  if (!(g >= 0.0 && g <= static_cast<double>(T))) {
    throw ParameterError("divergence_decomposition: g must lie in [0, T]");
  }
  // Both best arms are N(0, 1), so the first term vanishes.
  return (static_cast<double>(T) - g) * kl_gaussian(0.0, 0.0) +
         g * kl_gaussian(-delta, -delta_prime);
}

double bh_bound(double kl) {
  if (!(kl >= 0.0)) throw ParameterError("bh_bound: kl must be >= 0");
  return 0.5 * std::exp(-kl);
}

double variability_pair_constant() noexcept {
  return std::sqrt(std::exp(-0.5) / 2.0) / 4.0;
}

namespace {

struct ArmSample {
  std::vector<double> values;
  double mean = 0.0;
  double mean_se = 0.0;
  double sd = 0.0;
  double sd_se = 0.0;
};

// Sample moments of the inferior arm's pull count. The standard error of
// the sample sd uses the delta method on the sample variance.
ArmSample inferior_arm_counts(const std::vector<TrialRecord>& records) {
  ArmSample s;
  RunningStats rs;
  s.values.reserve(records.size());
  for (const auto& r : records) {
    const auto v = static_cast<double>(r.counts.at(1));
    s.values.push_back(v);
    rs.push(v);
  }
  const auto n = static_cast<double>(records.size());
  s.mean = rs.mean();
  s.sd = rs.sd();
  s.mean_se = rs.standard_error();
  double m4 = 0.0;
  for (double v : s.values) {
    const double d = v - s.mean;
    m4 += d * d * d * d;
  }
  m4 /= n;
  const double var = rs.variance();
  const double var_of_var = std::max(0.0, (m4 - (n - 3.0) / (n - 1.0) * var * var) / n);
  s.sd_se = s.sd > 0.0 ? std::sqrt(var_of_var) / (2.0 * s.sd) : 0.0;
  return s;
}

}  // namespace

PairReport check_instance_pair(const PolicySpec& spec, double delta, std::int64_t T,
                               std::int64_t n_trials, std::uint64_t master_seed,
                               unsigned threads) {
  if (!(delta >= 0.0)) throw ParameterError("check_instance_pair: delta must be >= 0");
  if (T < 2) throw ParameterError("check_instance_pair: T must be >= 2");
  if (n_trials < 2) throw ParameterError("check_instance_pair: n_trials must be >= 2");

  PairReport rep;
  rep.spec = spec;
  rep.T = T;
  rep.n_trials = n_trials;
  rep.delta = delta;

  const auto first = inferior_arm_counts(
      run_trials(make_gap_instance(delta), spec, T, n_trials, master_seed, sweep_stream_id(0, 0), threads));
  // The estimate stands in for the unknown true g(delta).
  rep.delta_prime = delta + 1.0 / std::sqrt(first.mean);
  const auto second = inferior_arm_counts(run_trials(make_gap_instance(rep.delta_prime), spec, T,
                                                     n_trials, master_seed, sweep_stream_id(1, 0),
                                                     threads));

  const std::array<const ArmSample*, 2> arms{&first, &second};
  for (int k = 0; k < 2; ++k) {
    rep.g_hat[k] = arms[k]->mean;
    rep.g_se[k] = arms[k]->mean_se;
    rep.S_hat[k] = arms[k]->sd;
    rep.S_se[k] = arms[k]->sd_se;
  }

  const int s_arg = rep.S_hat[0] >= rep.S_hat[1] ? 0 : 1;
  rep.lhs = rep.S_hat[s_arg];
  rep.lhs_se = rep.S_se[s_arg];
  const double c = variability_pair_constant();
  rep.rhs = c * std::abs(rep.g_hat[0] - rep.g_hat[1]);
  rep.rhs_se = c * std::hypot(rep.g_se[0], rep.g_se[1]);

  // The event {N < midpoint} under the instance with the larger mean count,
  // and its complement {N >= midpoint} under the other one.
  rep.midpoint = 0.5 * (rep.g_hat[0] + rep.g_hat[1]);
  rep.upper_instance = rep.g_hat[0] >= rep.g_hat[1] ? 0 : 1;
  const auto& upper = *arms[rep.upper_instance];
  const auto& lower = *arms[1 - rep.upper_instance];
  const auto n = static_cast<double>(n_trials);
  const auto below = std::count_if(upper.values.begin(), upper.values.end(),
                                   [&](double v) { return v < rep.midpoint; });
  const auto at_or_above = std::count_if(lower.values.begin(), lower.values.end(),
                                         [&](double v) { return v >= rep.midpoint; });
  rep.p_below = static_cast<double>(below) / n;
  rep.p_at_or_above = static_cast<double>(at_or_above) / n;
  rep.bh_lhs = rep.p_below + rep.p_at_or_above;
  rep.bh_lhs_se = std::sqrt(rep.p_below * (1.0 - rep.p_below) / n +
                            rep.p_at_or_above * (1.0 - rep.p_at_or_above) / n);

  rep.kl_forward = divergence_decomposition(delta, rep.delta_prime, rep.g_hat[0], T);
  rep.kl_reverse = divergence_decomposition(rep.delta_prime, delta, rep.g_hat[1], T);
  rep.bh_rhs = std::max(bh_bound(rep.kl_forward), bh_bound(rep.kl_reverse));

  rep.lemma_holds = rep.lhs - rep.rhs >= -3.0 * std::hypot(rep.lhs_se, rep.rhs_se);
  rep.bh_holds = rep.bh_lhs - rep.bh_rhs >= -3.0 * rep.bh_lhs_se;
  return rep;
}

}  // namespace allocvar
