// Acceptance suite: runs every primary criterion at its stated scale and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failing criteria.
//
//   allocvar_acceptance [--out DIR] [--threads N] [--only 1,5,...] [--fresh]
//
// The pareto sweep (criteria 5, 8, 9) is checkpointed under DIR so an
// interrupted run resumes where it stopped.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "allocvar/fluid.hpp"
#include "allocvar/report.hpp"
#include "allocvar/runner.hpp"
#include "allocvar/sim.hpp"
#include "allocvar/stats.hpp"
#include "allocvar/theory.hpp"
#include "support/fluid_oracle.hpp"
#include "support/llr_oracle.hpp"

using namespace allocvar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Minimal reader for the CSVs written by the runner; cells are addressed by
// column name so the check doubles as a schema handshake.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static Csv read(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    Csv csv;
    std::string line;
    auto split = [](const std::string& l) {
      std::vector<std::string> cells;
      std::string c;
      std::istringstream is(l);
      while (std::getline(is, c, ',')) cells.push_back(c);
      if (!l.empty() && l.back() == ',') cells.emplace_back();
      return cells;
    };
    std::getline(f, line);
    csv.header = split(line);
    while (std::getline(f, line)) csv.rows.push_back(split(line));
    return csv;
  }

  std::size_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
  double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][col(name)]); }
  const std::string& str(std::size_t row, const std::string& name) const { return rows[row][col(name)]; }
};

struct Context {
  fs::path out;
  unsigned threads = 0;
};

// ---------------------------------------------------------------- 1

Outcome example1(const Context& ctx) {
  Outcome o;
  ExperimentConfig cfg;
  cfg.subcommand = Subcommand::example1;
  cfg.seed = 7;
  cfg.threads = ctx.threads;
  cfg.out = (ctx.out / "example1").string();
  const auto start = std::chrono::steady_clock::now();
  run(cfg);
  const double elapsed = seconds_since(start);

  const auto results = Csv::read(ctx.out / "example1" / "results.csv");
  double sd1 = -1.0;
  for (std::size_t r = 0; r < results.rows.size(); ++r) {
    if (results.str(r, "arm") == "1") sd1 = results.num(r, "sd_count");
  }
  const auto hist = Csv::read(ctx.out / "example1" / "histogram.csv");
  int non_empty = 0;
  for (std::size_t r = 0; r < hist.rows.size(); ++r) non_empty += hist.num(r, "count") > 0;

  o.require(hist.rows.size() == 100, "100 histogram bins");
  o.require(sd1 / 5000.0 >= 0.15, "sd(N_1)/T = " + fmt(sd1 / 5000.0) + " >= 0.15");
  o.require(non_empty >= 90, std::to_string(non_empty) + " of 100 bins non-empty (>= 90)");
  o.require(elapsed <= 300.0, "runtime " + fmt(elapsed, 3) + " s <= 300 s");
  return o;
}

// ---------------------------------------------------------------- 2

Outcome symmetry(const Context& ctx) {
  Outcome o;
  const auto rr = run_experiment(make_gap_instance(0.0), PolicySpec::round_robin(), 1000, 1000, 2, ctx.threads);
  o.require(rr.S_T_hat == 0.0, "round robin T=1000: S_T_hat = " + fmt(rr.S_T_hat) + " (exactly 0)");
  const auto ucb = run_experiment(make_gap_instance(0.0), PolicySpec::ucbf(ExplorationFunction::ucb1()), 4096,
                                  10000, 2, ctx.threads);
  const double se = ucb.sd_counts[0] / std::sqrt(10000.0);
  const double dev = std::abs(ucb.mean_counts[0] - 2048.0);
  o.require(dev <= 3.0 * se, "UCB1 delta=0 T=4096: |mean N_1 - 2048| = " + fmt(dev) + " <= 3 SE = " + fmt(3 * se));
  return o;
}

// ---------------------------------------------------------------- 3

Outcome fluid(const Context&) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, ExplorationFunction>> fs_{
      {"sqrt(2 ln t)", ExplorationFunction::ucb1()},
      {"ln t", ExplorationFunction::power_log(0.0)},
      {"t^(1/8) ln t", ExplorationFunction::power_log(0.125)},
      {"t^(1/4) ln t", ExplorationFunction::power_log(0.25)}};
  std::vector<std::int64_t> grid;
  for (int e = 4; e <= 20; ++e) grid.push_back(std::int64_t{1} << e);

  int cases = 0, residual_bad = 0, oracle_bad = 0, mono_pairs = 0, mono_bad = 0;
  double worst_residual = 0.0, worst_rel = 0.0;
  for (const auto& [name, f] : fs_) {
    const double onset = validate_exploration_function(f).monotone_from;
    for (int K : {2, 3, 8}) {
      for (double gap : {0.0, 0.1, 1.0}) {
        std::vector<double> means(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i) means[static_cast<std::size_t>(i)] = -gap * i / (K - 1);
        const auto traj = fluid_trajectory(means, f, grid);
        for (std::size_t k = 0; k < traj.size(); ++k) {
          const auto& s = traj[k];
          ++cases;
          worst_residual = std::max(worst_residual, s.residual / s.t);
          residual_bad += !(s.residual <= 1e-9 * s.t);
          const auto ref = oracle::solve_fluid(means, s.f_t, s.t);
          for (std::size_t i = 0; i < means.size(); ++i) {
            const double rel = std::abs(s.n[i] - ref.n[i]) / ref.n[i];
            worst_rel = std::max(worst_rel, rel);
            oracle_bad += !(rel <= 1e-8);
          }
          if (k == 0 || static_cast<double>(grid[k - 1]) < onset) continue;
          const auto& p = traj[k - 1];
          for (std::size_t i = 0; i < means.size(); ++i) {
            ++mono_pairs;
            const bool n_up = s.n[i] >= p.n[i] * (1.0 - 1e-12);
            const bool r_up = std::sqrt(s.n[i]) / s.f_t >= std::sqrt(p.n[i]) / p.f_t * (1.0 - 1e-12);
            mono_bad += !(n_up && r_up);
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(cases >= 200, std::to_string(cases) + " cases (>= 200)");
  o.require(residual_bad == 0, "residual <= 1e-9 t everywhere (worst " + fmt(worst_residual, 3) + " t)");
  o.require(oracle_bad == 0, "oracle agreement <= 1e-8 relative (worst " + fmt(worst_rel, 3) + ")");
  o.require(mono_bad == 0, "n_i and sqrt(n_i)/f(t) non-decreasing on " + std::to_string(mono_pairs) +
                               " consecutive pairs past the f onset");
  o.require(elapsed <= 10.0, "runtime " + fmt(elapsed, 3) + " s <= 10 s");
  return o;
}

// ---------------------------------------------------------------- 4

Outcome concentration(const Context& ctx) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t T = 1 << 14;
  for (const auto& [name, f] : std::vector<std::pair<std::string, ExplorationFunction>>{
           {"sqrt(2 ln t)", ExplorationFunction::ucb1()}, {"t^(1/4) ln t", ExplorationFunction::power_log(0.25)}}) {
    for (double delta : {0.25, 0.5, 1.0}) {
      const auto s = run_experiment(make_gap_instance(delta), PolicySpec::ucbf(f), T, 10000, 4, ctx.threads);
      const std::vector<double> means{0.0, -delta};
      const double n2 = solve_fluid(means, f(static_cast<double>(T)), static_cast<double>(T)).n[1];
      const double bound = predicted_variability_bound(n2, f(static_cast<double>(T)), T, 2);
      const std::string tag = "f=" + name + " delta=" + fmt(delta) + ": ";
      o.require(s.mean_counts[1] <= 4.0 * n2, tag + "mean N_2 = " + fmt(s.mean_counts[1]) + " <= 4 n_2 = " + fmt(4 * n2));
      o.require(s.S_T_hat <= bound, tag + "S_T_hat = " + fmt(s.S_T_hat) + " <= ceiling " + fmt(bound));
    }
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed <= 900.0, "runtime " + fmt(elapsed, 3) + " s <= 900 s");
  return o;
}

// ---------------------------------------------------------------- 5, 8, 9

struct ParetoData {
  Csv frontier, slopes, results;
  double elapsed = 0.0;
  bool loaded = false;
};

ParetoData& pareto(const Context& ctx) {
  static ParetoData data;
  if (data.loaded) return data;
  ExperimentConfig cfg;
  cfg.subcommand = Subcommand::pareto;
  cfg.gammas = {0.0, 0.125, 0.25};
  cfg.T = {1 << 10, 1 << 12, 1 << 14, 1 << 16};
  cfg.n_trials = 10000;
  cfg.seed = 1;
  cfg.threads = ctx.threads;
  cfg.out = (ctx.out / "pareto").string();
  const auto start = std::chrono::steady_clock::now();
  run(cfg, &std::cerr);
  data.elapsed = seconds_since(start);
  data.frontier = Csv::read(ctx.out / "pareto" / "frontier.csv");
  data.slopes = Csv::read(ctx.out / "pareto" / "slopes.csv");
  data.results = Csv::read(ctx.out / "pareto" / "results.csv");
  data.loaded = true;
  return data;
}

std::size_t slope_row(const Csv& slopes, double gamma) {
  for (std::size_t r = 0; r < slopes.rows.size(); ++r) {
    if (slopes.num(r, "gamma") == gamma) return r;
  }
  throw std::runtime_error("no slope row for gamma " + fmt(gamma));
}

Outcome rates(const Context& ctx) {
  Outcome o;
  const auto& d = pareto(ctx);
  for (std::size_t r = 0; r < d.frontier.rows.size(); ++r) {
    o.info("gamma=" + d.frontier.str(r, "gamma") + " T=" + d.frontier.str(r, "T") +
           ": grid-worst R=" + fmt(d.frontier.num(r, "worst_R")) + " (delta " +
           fmt(d.frontier.num(r, "worst_R_delta")) + "), grid-worst S=" + fmt(d.frontier.num(r, "worst_S")) +
           " (delta " + fmt(d.frontier.num(r, "worst_S_delta")) + ")");
  }
  for (double g : {0.0, 0.125, 0.25}) {
    const auto r = slope_row(d.slopes, g);
    const double sS = d.slopes.num(r, "slope_S");
    const double sR = d.slopes.num(r, "slope_R");
    const double sP = d.slopes.num(r, "slope_product");
    const std::string tag = "gamma=" + fmt(g) + ": ";
    o.require(std::abs(sS - (1.0 - g)) <= 0.1, tag + "S slope " + fmt(sS) + " vs " + fmt(1.0 - g) + " +- 0.1");
    o.require(std::abs(sR - (0.5 + g)) <= 0.1, tag + "R slope " + fmt(sR) + " vs " + fmt(0.5 + g) + " +- 0.1");
    o.require(std::abs(sP - 1.5) <= 0.15, tag + "product slope " + fmt(sP) + " vs 1.5 +- 0.15");
  }
  o.require(d.elapsed <= 7200.0, "sweep runtime " + fmt(d.elapsed, 4) + " s <= 7200 s");
  return o;
}

Outcome flatness(const Context& ctx) {
  Outcome o;
  const auto& d = pareto(ctx);
  for (double g : {0.0, 0.25}) {
    const double s = d.slopes.num(slope_row(d.slopes, g), "slope_sd_regret");
    o.require(std::abs(s - 0.5) <= 0.15, "gamma=" + fmt(g) + ": sd(R_hat) slope " + fmt(s) + " vs 0.5 +- 0.15");
  }
  const double gap = d.slopes.num(slope_row(d.slopes, 0.25), "slope_R") - d.slopes.num(slope_row(d.slopes, 0.0), "slope_R");
  o.require(std::abs(gap - 0.25) <= 0.1, "regret slope difference " + fmt(gap) + " vs 0.25 +- 0.1");
  return o;
}

// Grid-worst R + S at rho = 1 for UCB-f with gamma at horizon T.
double worst_objective(const Csv& results, double gamma, std::int64_t T, double* at_delta) {
  double worst = -1.0;
  for (std::size_t r = 0; r < results.rows.size(); ++r) {
    if (results.str(r, "arm") != "all" || results.str(r, "policy_kind") != "ucbf") continue;
    if (results.num(r, "gamma") != gamma || results.num(r, "T") != static_cast<double>(T)) continue;
    const double v = results.num(r, "R_T_hat") + results.num(r, "S_T_hat");
    if (v > worst) {
      worst = v;
      *at_delta = results.num(r, "delta");
    }
  }
  if (worst < 0.0) throw std::runtime_error("no results for gamma " + fmt(gamma));
  return worst;
}

Outcome platform(const Context& ctx) {
  Outcome o;
  const auto& d = pareto(ctx);
  const std::int64_t T = 1 << 16;
  double d_tuned = 0.0, d_zero = 0.0;
  const double tuned = worst_objective(d.results, 0.25, T, &d_tuned);
  const double zero = worst_objective(d.results, 0.0, T, &d_zero);
  const auto rr = run_experiment(make_gap_instance(1.0), PolicySpec::round_robin(), T, 10000, 1, ctx.threads);
  const double rr_obj = platform_objective(rr, 1.0);
  o.info("gamma=0.25: grid-worst R+S = " + fmt(tuned, 6) + " at delta " + fmt(d_tuned));
  o.info("gamma=0:    grid-worst R+S = " + fmt(zero, 6) + " at delta " + fmt(d_zero));
  o.info("round robin, delta=1: R+S = " + fmt(rr_obj, 6));
  o.require(tuned < zero, "gamma=0.25 below gamma=0");
  o.require(tuned < rr_obj, "gamma=0.25 below round robin at delta=1");
  return o;
}

// ---------------------------------------------------------------- 6

Outcome worst_location(const Context& ctx) {
  Outcome o;
  const std::int64_t T = 10000;
  const auto grid = DeltaGrid::standard().resolve(T);
  const auto sw = sweep_delta(PolicySpec::ucbf(ExplorationFunction::ucb1()), T, grid, 10000, 6, ctx.threads);
  for (const auto& row : sw.rows) {
    o.info("delta=" + fmt(row.delta) + ": S_T_hat=" + fmt(row.stats.S_T_hat) + " R_T_hat=" + fmt(row.stats.R_T_hat));
  }
  const double at = sw.rows[sw.argmax_S].delta;
  o.require(at <= 4.0 / std::sqrt(static_cast<double>(T)) + 1e-15,
            "argmax S at delta " + fmt(at) + " <= 4/sqrt(T) = 0.04");
  return o;
}

// ---------------------------------------------------------------- 7

Outcome theory(const Context& ctx) {
  Outcome o;
  o.require(bh_bound(0.0) == 0.5 && std::abs(bh_bound(0.5) - 0.5 * std::exp(-0.5)) < 1e-15,
            "bh_bound(0) = 0.5, bh_bound(0.5) = exp(-1/2)/2");
  const std::int64_t T = 4096;
  const std::int64_t n = 10000;
  const std::vector<std::pair<std::string, PolicySpec>> policies{
      {"round_robin", PolicySpec::round_robin()},
      {"ucb1", PolicySpec::ucbf(ExplorationFunction::ucb1())},
      {"ts_gaussian", PolicySpec::ts_gaussian()}};
  for (const auto& [name, spec] : policies) {
    const auto rep = check_instance_pair(spec, 0.0, T, n, 7, ctx.threads);
    const std::string tag = name + " delta=0 T=4096: ";
    o.info(tag + "delta'=" + fmt(rep.delta_prime) + " g=(" + fmt(rep.g_hat[0]) + ", " + fmt(rep.g_hat[1]) +
           ") S=(" + fmt(rep.S_hat[0]) + ", " + fmt(rep.S_hat[1]) + ")");
    o.require(rep.lemma_holds, tag + "max S = " + fmt(rep.lhs) + " >= c|g - g'| = " + fmt(rep.rhs) +
                                   " (slack " + fmt(rep.lhs - rep.rhs) + ", 3 SE " +
                                   fmt(3 * std::hypot(rep.lhs_se, rep.rhs_se)) + ")");
    o.require(rep.bh_holds, tag + "P + Q = " + fmt(rep.bh_lhs) + " >= exp(-KL)/2 = " + fmt(rep.bh_rhs) +
                                " (slack " + fmt(rep.bh_lhs - rep.bh_rhs) + ")");

    // Likelihood-ratio cross-check of the divergence decomposition under
    // the base instance, against the pair's alternative.
    RunningStats llr, resid, n2;
    const auto inst = make_gap_instance(rep.delta);
    std::vector<double> llr_values(static_cast<std::size_t>(n)), n2_values(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
      oracle::LlrAccumulator acc{rep.delta, rep.delta_prime};
      run_trial(inst, spec, T, TrialStreams::derive(split_seed(70, static_cast<std::uint64_t>(k)), 2), nullptr,
                std::ref(acc));
      llr.push(acc.llr);
      n2.push(static_cast<double>(acc.arm2_pulls));
      resid.push(acc.llr - divergence_decomposition(rep.delta, rep.delta_prime,
                                                    static_cast<double>(acc.arm2_pulls), T));
    }
    const double predicted = divergence_decomposition(rep.delta, rep.delta_prime, n2.mean(), T);
    o.require(std::abs(llr.mean() - predicted) <= 3.0 * llr.standard_error(),
              tag + "mean LLR " + fmt(llr.mean()) + " vs decomposition " + fmt(predicted) + " within 3 SE (" +
                  fmt(3 * llr.standard_error()) + ")");
    o.require(std::abs(resid.mean()) <= 3.0 * resid.standard_error(),
              tag + "pathwise residual mean " + fmt(resid.mean()) + " within 3 SE (" + fmt(3 * resid.standard_error()) + ")");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"allocvar acceptance suite"};
  std::string out = "acceptance_out";
  unsigned threads = 0;
  std::vector<int> only;
  bool fresh = false;
  app.add_option("--out", out, "working directory for outputs and checkpoints");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_flag("--fresh", fresh, "discard checkpoints from earlier runs");
  CLI11_PARSE(app, argc, argv);

  Context ctx{fs::absolute(out), threads};
  if (fresh) fs::remove_all(ctx.out);
  fs::create_directories(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"Example 1 spread (TS-Bernoulli, T=5000, 20000 trials)", example1},
      {"symmetry and zero variability", symmetry},
      {"fluid solver residuals, oracle, monotonicity", fluid},
      {"concentration surrogates at T=2^14", concentration},
      {"rate regression over the pareto sweep", rates},
      {"worst-case location for UCB1 at T=10^4", worst_location},
      {"theory oracles and pair checks", theory},
      {"regret-variability flatness", flatness},
      {"platform objective at rho=1, T=2^16", platform},
  };
  const std::set<int> selected(only.begin(), only.end());

  int failures = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(start);
    for (const auto& note : o.notes) std::cout << "  [" << id << "] " << note << '\n';
    std::ostringstream line;
    line << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ("
         << fmt(elapsed, 4) << " s)";
    std::cout << line.str() << std::endl;
    summary.push_back(line.str());
    failures += !o.pass;
  }
  std::cout << "\nsummary\n";
  for (const auto& s : summary) std::cout << s << '\n';
  return failures;
}
