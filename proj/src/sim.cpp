#include "allocvar/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "allocvar/errors.hpp"
#include "allocvar/fluid.hpp"
#include "allocvar/rng.hpp"
#include "allocvar/stats.hpp"

namespace allocvar {

namespace {

constexpr std::int64_t kBlockSize = 256;
constexpr double kZ95 = 1.959963984540054;

// Runs body(i) for i in [0, n) on `threads` workers. Work is handed out in
// chunks through an atomic counter; the first exception is rethrown.
template <class Body>
void parallel_for(std::int64_t n, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::int64_t>(std::max(1u, threads), std::max<std::int64_t>(1, n)));
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::int64_t chunk = 8;
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(chunk);
        if (begin >= n) return;
        const std::int64_t end = std::min(n, begin + chunk);
        for (std::int64_t i = begin; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

}  // namespace

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

TrialStreams TrialStreams::derive(std::uint64_t trial_seed, std::size_t num_arms) {
  TrialStreams s;
  s.policy_seed = split_seed(trial_seed, 0);
  s.arm_seeds.reserve(num_arms);
  for (std::size_t i = 0; i < num_arms; ++i) s.arm_seeds.push_back(split_seed(trial_seed, i + 1));
  return s;
}

TrialRecord run_trial(const BanditInstance& inst, const PolicySpec& spec, std::int64_t T,
                      std::uint64_t seed) {
  TrialRecord rec = run_trial(inst, spec, T, TrialStreams::derive(seed, inst.size()));
  rec.seed = seed;
  return rec;
}

TrialRecord run_trial(const BanditInstance& inst, const PolicySpec& spec, std::int64_t T,
                      const TrialStreams& streams, const ExplorationSchedule& schedule,
                      const RoundObserver& observer) {
  const std::size_t K = inst.size();
  if (K < 1) throw ParameterError("run_trial: instance has no arms");
  if (T < static_cast<std::int64_t>(K)) throw ParameterError("run_trial: T must be >= K");
  if (streams.arm_seeds.size() != K) throw ParameterError("run_trial: one arm stream per arm required");

  PolicyState state(spec, K, T, schedule);
  RandomStream policy_rng(streams.policy_seed);
  std::vector<RandomStream> arm_rng;
  arm_rng.reserve(K);
  for (auto s : streams.arm_seeds) arm_rng.emplace_back(s);
  const auto& arms = inst.arms();

  for (std::int64_t t = 1; t <= T; ++t) {
    const std::size_t a = state.select_arm(policy_rng);
    const double reward = arms[a].sample(arm_rng[a]);
    state.update(a, reward);
    if (observer) observer(t, a, reward);
  }

  TrialRecord rec;
  rec.counts = state.counts();
  const auto& gaps = inst.gaps();
  for (std::size_t i = 0; i < K; ++i) rec.pseudo_regret += gaps[i] * static_cast<double>(rec.counts[i]);
  return rec;
}

std::vector<TrialRecord> run_trials(const BanditInstance& inst, const PolicySpec& spec,
                                    std::int64_t T, std::int64_t n_trials,
                                    std::uint64_t master_seed, std::uint64_t stream_base,
                                    unsigned threads) {
  spec.validate();
  if (n_trials < 1) throw ParameterError("run_trials: n_trials must be positive");
  if (T < static_cast<std::int64_t>(inst.size())) throw ParameterError("run_trials: T must be >= K");
  const ExplorationSchedule schedule = spec.f ? make_schedule(*spec.f, T) : nullptr;

  std::vector<TrialRecord> records(static_cast<std::size_t>(n_trials));
  parallel_for(n_trials, resolve_threads(threads), [&](std::int64_t k) {
    const std::uint64_t seed = split_seed(master_seed, stream_base + static_cast<std::uint64_t>(k));
    TrialRecord rec = run_trial(inst, spec, T, TrialStreams::derive(seed, inst.size()), schedule);
    rec.seed = seed;
    rec.trial_index = k;
    records[static_cast<std::size_t>(k)] = std::move(rec);
  });
  return records;
}

AllocationStats summarize(std::span<const TrialRecord> records, const BanditInstance& inst,
                          const PolicySpec& spec, std::int64_t T) {
  const std::size_t K = inst.size();
  const auto n = static_cast<std::int64_t>(records.size());
  if (n < 2) throw ParameterError("summarize: at least two trials are needed");
  const std::size_t ref_arm = K > 1 ? 1 : 0;

  // Per-arm counts, pseudo-regret, then the reference arm's raw counts
  // (normalized after the fact once the reference level is known).
  const std::size_t width = K + 1;
  std::vector<RunningStats> total(width);
  for (std::int64_t begin = 0; begin < n; begin += kBlockSize) {
    std::vector<RunningStats> block(width);
    const std::int64_t end = std::min(n, begin + kBlockSize);
    for (std::int64_t k = begin; k < end; ++k) {
      const auto& rec = records[static_cast<std::size_t>(k)];
      if (rec.counts.size() != K) throw ParameterError("summarize: record arity mismatch");
      for (std::size_t i = 0; i < K; ++i) block[i].push(static_cast<double>(rec.counts[i]));
      block[K].push(rec.pseudo_regret);
    }
    for (std::size_t j = 0; j < width; ++j) total[j].merge(block[j]);
  }

  AllocationStats s;
  s.n_trials = n;
  s.T = T;
  s.mean_counts.resize(K);
  s.sd_counts.resize(K);
  s.ci_halfwidths.resize(K);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < K; ++i) {
    s.mean_counts[i] = total[i].mean();
    s.sd_counts[i] = total[i].sd();
    s.ci_halfwidths[i] = kZ95 * s.sd_counts[i] / root_n;
    s.S_T_hat = std::max(s.S_T_hat, s.sd_counts[i]);
  }
  const auto& gaps = inst.gaps();
  for (std::size_t i = 0; i < K; ++i) s.R_T_hat += gaps[i] * s.mean_counts[i];
  s.sd_regret_hat = total[K].sd();

  double reference = s.mean_counts[ref_arm];
  if (spec.kind == PolicyKind::ucbf && K >= 2) {
    const auto means = inst.means();
    const auto fluid = solve_fluid(means, (*spec.f)(static_cast<double>(T)), static_cast<double>(T));
    reference = fluid.n[ref_arm];
  }
  s.dispersion_reference = reference;
  s.dispersion_ratio = reference > 0.0 ? s.sd_counts[ref_arm] / reference : 0.0;
  return s;
}

AllocationStats run_experiment(const BanditInstance& inst, const PolicySpec& spec,
                               std::int64_t T, std::int64_t n_trials,
                               std::uint64_t master_seed, unsigned threads) {
  if (n_trials < 2) throw ParameterError("run_experiment: n_trials must be >= 2");
  const auto records = run_trials(inst, spec, T, n_trials, master_seed, 0, threads);
  return summarize(records, inst, spec, T);
}

double platform_objective(const AllocationStats& stats, double rho) {
  if (!(rho >= 0.0)) throw ParameterError("platform_objective: rho must be >= 0");
  return stats.R_T_hat + std::pow(stats.S_T_hat, rho);
}

std::string cell_key(const PolicySpec& spec, std::int64_t T, std::size_t delta_index,
                     double delta, std::int64_t n_trials, std::uint64_t master_seed) {
  std::ostringstream os;
  os << "policy=" << to_string(spec.kind);
  if (spec.f) os << ";a=" << hexfloat(spec.f->a) << ";gamma=" << hexfloat(spec.f->gamma)
                 << ";beta=" << hexfloat(spec.f->beta);
  if (spec.explore_rounds) os << ";explore_rounds=" << *spec.explore_rounds;
  if (spec.switch_alpha) os << ";switch_alpha=" << hexfloat(*spec.switch_alpha);
  os << ";T=" << T << ";cell=" << delta_index << ";delta=" << hexfloat(delta)
     << ";trials=" << n_trials << ";seed=" << master_seed;
  return os.str();
}

GridWorst DeltaSweep::worst() const {
  if (rows.empty()) throw StateError("DeltaSweep::worst: empty sweep");
  GridWorst w;
  const auto& r = rows[argmax_R];
  const auto& s = rows[argmax_S];
  const auto& v = rows[argmax_sd_regret];
  w.R = r.stats.R_T_hat;
  w.R_delta = r.delta;
  w.S = s.stats.S_T_hat;
  w.S_delta = s.delta;
  w.sd_regret = v.stats.sd_regret_hat;
  w.sd_regret_delta = v.delta;
  return w;
}

DeltaSweep sweep_delta(const PolicySpec& spec, std::int64_t T, std::span<const double> grid,
                       std::int64_t n_trials, std::uint64_t master_seed, unsigned threads,
                       const SweepHooks* hooks) {
  if (grid.empty()) throw ParameterError("sweep_delta: empty delta grid");
  if (n_trials < 2) throw ParameterError("sweep_delta: n_trials must be >= 2");
  for (double d : grid) {
    if (!(d >= 0.0 && d <= 2.0)) throw ParameterError("sweep_delta: grid values must lie in [0, 2]");
  }
  DeltaSweep out;
  out.rows.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double delta = grid[j];
    const std::string key = cell_key(spec, T, j, delta, n_trials, master_seed);
    std::optional<AllocationStats> cached;
    if (hooks && hooks->load) cached = hooks->load(key);
    if (!cached) {
      const BanditInstance inst = make_gap_instance(delta);
      const auto records = run_trials(inst, spec, T, n_trials, master_seed,
                                      sweep_stream_id(j, 0), threads);
      cached = summarize(records, inst, spec, T);
      if (hooks && hooks->save) hooks->save(key, *cached);
    }
    if (hooks && hooks->progress) hooks->progress(key);
    out.rows.push_back({delta, std::move(*cached)});
  }
  for (std::size_t j = 1; j < out.rows.size(); ++j) {
    const auto& st = out.rows[j].stats;
    if (st.S_T_hat > out.rows[out.argmax_S].stats.S_T_hat) out.argmax_S = j;
    if (st.R_T_hat > out.rows[out.argmax_R].stats.R_T_hat) out.argmax_R = j;
    if (st.sd_regret_hat > out.rows[out.argmax_sd_regret].stats.sd_regret_hat) out.argmax_sd_regret = j;
  }
  return out;
}

double grid_worst_objective(const DeltaSweep& sweep, double rho) {
  if (sweep.rows.empty()) throw ParameterError("grid_worst_objective: empty sweep");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : sweep.rows) worst = std::max(worst, platform_objective(row.stats, rho));
  return worst;
}

std::vector<double> DeltaGrid::resolve(std::int64_t T) const {
  if (T < 1) throw ParameterError("DeltaGrid: T must be positive");
  std::vector<double> out;
  const double root_t = std::sqrt(static_cast<double>(T));
  for (double m : root_t_multiples) out.push_back(m / root_t);
  for (double d : absolute) out.push_back(d);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DeltaGrid DeltaGrid::standard() {
  return {{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}, {0.5, 1.0}};
}

Frontier pareto_sweep(std::span<const double> gammas, std::span<const std::int64_t> Ts,
                      const DeltaGrid& grid, std::int64_t n_trials, std::uint64_t master_seed,
                      unsigned threads, const SweepHooks* hooks) {
  if (gammas.empty() || Ts.empty()) throw ParameterError("pareto_sweep: empty gamma or T list");
  for (double g : gammas) {
    const auto report = validate_exploration_function(ExplorationFunction::power_log(g));
    if (!report.ok()) throw ParameterError("pareto_sweep: gamma gives invalid f: " + report.violations.front());
  }
  Frontier out;
  for (double g : gammas) {
    const PolicySpec spec = PolicySpec::ucbf(ExplorationFunction::power_log(g));
    std::vector<double> xs, rs, ss, ps, vs;
    for (std::int64_t T : Ts) {
      const auto deltas = grid.resolve(T);
      FrontierRow row;
      row.gamma = g;
      row.T = T;
      row.sweep = sweep_delta(spec, T, deltas, n_trials, master_seed, threads, hooks);
      row.worst = row.sweep.worst();
      xs.push_back(static_cast<double>(T));
      rs.push_back(row.worst.R);
      ss.push_back(row.worst.S);
      ps.push_back(row.worst.R * row.worst.S);
      vs.push_back(row.worst.sd_regret);
      out.rows.push_back(std::move(row));
    }
    FrontierSlopes sl;
    sl.gamma = g;
    if (xs.size() >= 2) {
      sl.R = loglog_slope(xs, rs);
      sl.S = loglog_slope(xs, ss);
      sl.product = loglog_slope(xs, ps);
      sl.sd_regret = loglog_slope(xs, vs);
    }
    out.slopes.push_back(sl);
  }
  return out;
}

}  // namespace allocvar
