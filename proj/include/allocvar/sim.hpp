#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "allocvar/env.hpp"
#include "allocvar/policies.hpp"

namespace allocvar {

/// Outcome of one simulated run of T rounds.
struct TrialRecord {
  std::vector<std::int64_t> counts;
  /// sum_i gap_i * N_i
  double pseudo_regret = 0.0;
  std::uint64_t seed = 0;
  std::int64_t trial_index = 0;
};

/// Seeds of the independent streams used inside one trial: one reward stream
/// per arm (arm i's rewards X^i_1, X^i_2, ... come from arm_seeds[i] in
/// order) and one stream for the policy's own randomness.
struct TrialStreams {
  std::uint64_t policy_seed = 0;
  std::vector<std::uint64_t> arm_seeds;

  static TrialStreams derive(std::uint64_t trial_seed, std::size_t num_arms);
};

/// Called after every round with (round, arm, reward).
using RoundObserver = std::function<void(std::int64_t, std::size_t, double)>;

TrialRecord run_trial(const BanditInstance& inst, const PolicySpec& spec,
                      std::int64_t T, std::uint64_t seed);

/// Lower-level entry point: explicit streams, optional shared f schedule
/// and optional per-round observer.
TrialRecord run_trial(const BanditInstance& inst, const PolicySpec& spec,
                      std::int64_t T, const TrialStreams& streams,
                      const ExplorationSchedule& schedule = nullptr,
                      const RoundObserver& observer = nullptr);

/// Monte Carlo estimates of allocation statistics over independent trials.
struct AllocationStats {
  std::int64_t n_trials = 0;
  std::int64_t T = 0;
  std::vector<double> mean_counts;
  std::vector<double> sd_counts;
  /// 95% normal-approximation half widths on mean_counts.
  std::vector<double> ci_halfwidths;
  /// max_i sd_counts (estimate of S_T)
  double S_T_hat = 0.0;
  /// sum_i gap_i * mean_counts_i (estimate of R_T)
  double R_T_hat = 0.0;
  /// sample sd of the per-trial pseudo-regret
  double sd_regret_hat = 0.0;
  /// sd of N_2 / n_2 across trials; n_2 from the fluid system for UCB-f,
  /// otherwise the Monte Carlo mean of N_2
  double dispersion_ratio = 0.0;
  double dispersion_reference = 0.0;

  bool operator==(const AllocationStats&) const = default;
};

/// Runs trials k = 0..n_trials-1 with seed split_seed(master_seed, stream_base + k).
/// Records are returned in trial order regardless of `threads`
/// (0 selects std::thread::hardware_concurrency()).
std::vector<TrialRecord> run_trials(const BanditInstance& inst, const PolicySpec& spec,
                                    std::int64_t T, std::int64_t n_trials,
                                    std::uint64_t master_seed, std::uint64_t stream_base = 0,
                                    unsigned threads = 0);

/// Aggregates records in fixed blocks of trial indices merged in index order.
AllocationStats summarize(std::span<const TrialRecord> records, const BanditInstance& inst,
                          const PolicySpec& spec, std::int64_t T);

AllocationStats run_experiment(const BanditInstance& inst, const PolicySpec& spec,
                               std::int64_t T, std::int64_t n_trials,
                               std::uint64_t master_seed, unsigned threads = 0);

/// R_T_hat + S_T_hat^rho.
double platform_objective(const AllocationStats& stats, double rho);

/// Optional checkpoint and progress hooks for long sweeps. `load` may return
/// a previously saved cell; `save` is called after each computed cell.
struct SweepHooks {
  std::function<std::optional<AllocationStats>(const std::string& key)> load;
  std::function<void(const std::string& key, const AllocationStats&)> save;
  std::function<void(const std::string& message)> progress;
};

/// Identifies one (policy, T, delta-cell) computation for checkpointing.
std::string cell_key(const PolicySpec& spec, std::int64_t T, std::size_t delta_index,
                     double delta, std::int64_t n_trials, std::uint64_t master_seed);

struct SweepRow {
  double delta = 0.0;
  AllocationStats stats;
};

/// Maxima over the delta grid. These lower-bound the true worst case over
/// the instance class and are labelled "grid-worst" in every report.
struct GridWorst {
  double R = 0.0, R_delta = 0.0;
  double S = 0.0, S_delta = 0.0;
  double sd_regret = 0.0, sd_regret_delta = 0.0;
};

struct DeltaSweep {
  std::vector<SweepRow> rows;
  std::size_t argmax_S = 0;
  std::size_t argmax_R = 0;
  std::size_t argmax_sd_regret = 0;

  GridWorst worst() const;
};

/// Runs the two-armed gap family at every delta in `grid` (values in [0, 2]).
/// Trial k of cell j uses stream id (j << 32) + k under `master_seed`.
DeltaSweep sweep_delta(const PolicySpec& spec, std::int64_t T,
                       std::span<const double> grid, std::int64_t n_trials,
                       std::uint64_t master_seed, unsigned threads = 0,
                       const SweepHooks* hooks = nullptr);

/// max over the grid of R_T_hat(delta) + S_T_hat(delta)^rho.
double grid_worst_objective(const DeltaSweep& sweep, double rho);

/// Delta grid whose entries may scale with the horizon: multiples of
/// 1/sqrt(T) plus absolute values. Resolved values are sorted and deduplicated.
struct DeltaGrid {
  std::vector<double> root_t_multiples;
  std::vector<double> absolute;

  std::vector<double> resolve(std::int64_t T) const;
  /// {0, .5, 1, 2, 4, 8, 16} / sqrt(T) together with {0.5, 1.0}.
  static DeltaGrid standard();
};

struct FrontierRow {
  double gamma = 0.0;
  std::int64_t T = 0;
  DeltaSweep sweep;
  GridWorst worst;
};

/// Least-squares slopes against ln T of the grid-worst metrics, per gamma.
struct FrontierSlopes {
  double gamma = 0.0;
  double R = 0.0;
  double S = 0.0;
  double product = 0.0;
  double sd_regret = 0.0;
};

struct Frontier {
  std::vector<FrontierRow> rows;
  std::vector<FrontierSlopes> slopes;
};

/// UCB-f with f(t) = t^gamma ln t for every gamma, swept over every horizon.
Frontier pareto_sweep(std::span<const double> gammas, std::span<const std::int64_t> Ts,
                      const DeltaGrid& grid, std::int64_t n_trials,
                      std::uint64_t master_seed, unsigned threads = 0,
                      const SweepHooks* hooks = nullptr);

unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace allocvar
