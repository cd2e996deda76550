#pragma once

#include <array>
#include <cstdint>

#include "allocvar/policies.hpp"

namespace allocvar {

/// KL(N(mu, 1) || N(mu_prime, 1)) = (mu - mu_prime)^2 / 2.
double kl_gaussian(double mu, double mu_prime) noexcept;

/// KL between the path laws a fixed policy induces on the gap instances
/// delta and delta_prime over T rounds, when the inferior arm is pulled g
/// times in expectation: (T - g) * 0 + g * (delta - delta_prime)^2 / 2.
/// Throws ParameterError unless 0 <= g <= T.
double divergence_decomposition(double delta, double delta_prime, double g, std::int64_t T);

/// Bretagnolle-Huber lower bound 1/2 exp(-kl) on P(A) + Q(A^c).
double bh_bound(double kl);

/// sqrt(exp(-1/2) / 2) / 4: the constant relating max{S(delta), S(delta')}
/// to |g(delta) - g(delta')| for the pair delta' = delta + 1/sqrt(g(delta)).
double variability_pair_constant() noexcept;

/// Both sides of the two-instance variability lower bound and of the
/// Bretagnolle-Huber step behind it, estimated by simulation. Index 0 refers
/// to the instance delta, index 1 to delta_prime.
struct PairReport {
  PolicySpec spec;
  std::int64_t T = 0;
  std::int64_t n_trials = 0;
  double delta = 0.0;
  double delta_prime = 0.0;

  std::array<double, 2> g_hat{};
  std::array<double, 2> g_se{};
  std::array<double, 2> S_hat{};
  std::array<double, 2> S_se{};

  /// max(S_hat)
  double lhs = 0.0;
  double lhs_se = 0.0;
  /// variability_pair_constant() * |g_hat[0] - g_hat[1]|
  double rhs = 0.0;
  double rhs_se = 0.0;

  /// (g_hat[0] + g_hat[1]) / 2
  double midpoint = 0.0;
  /// Instance (0 or 1) with the larger g_hat; it plays the role of P.
  int upper_instance = 0;
  /// P_upper(N < midpoint)
  double p_below = 0.0;
  /// P_lower(N >= midpoint)
  double p_at_or_above = 0.0;
  double bh_lhs = 0.0;
  double bh_lhs_se = 0.0;
  /// KL(P_delta || P_delta') and the reverse direction.
  double kl_forward = 0.0;
  double kl_reverse = 0.0;
  /// max of 1/2 exp(-KL) over both directions
  double bh_rhs = 0.0;

  /// lhs >= rhs within 3 standard errors.
  bool lemma_holds = false;
  /// bh_lhs >= bh_rhs within 3 standard errors.
  bool bh_holds = false;
};

/// Two-phase experiment: estimate g(delta), set delta' = delta + 1/sqrt(g),
/// then estimate everything under delta'. Phase k uses stream ids (k << 32) + trial.
PairReport check_instance_pair(const PolicySpec& spec, double delta, std::int64_t T,
                               std::int64_t n_trials, std::uint64_t master_seed,
                               unsigned threads = 0);

}  // namespace allocvar
