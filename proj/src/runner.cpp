#include "allocvar/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "allocvar/errors.hpp"
#include "allocvar/fluid.hpp"
#include "allocvar/report.hpp"
#include "allocvar/theory.hpp"

namespace allocvar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : root_(path) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
      throw ConfigError("out", "cannot create output directory '" + path + "'");
    }
    const auto probe = root_ / ".write_probe";
    {
      std::ofstream f(probe);
      if (!f) throw ConfigError("out", "output directory '" + path + "' is not writable");
    }
    fs::remove(probe, ec);
  }

  fs::path path(const std::string& name) const { return root_ / name; }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    const auto p = root_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    writer(f);
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + p.string());
    written_.push_back(p.string());
  }

  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

  const std::vector<std::string>& written() const noexcept { return written_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

SweepHooks checkpoint_hooks(const OutputDir& dir, std::ostream* progress) {
  const auto ckpt = dir.path("checkpoints");
  fs::create_directories(ckpt);
  SweepHooks hooks;
  hooks.load = [ckpt](const std::string& key) -> std::optional<AllocationStats> {
    const auto p = ckpt / (hex16(fnv1a(key)) + ".json");
    std::ifstream f(p);
    if (!f) return std::nullopt;
    try {
      const auto j = json::parse(f);
      if (j.at("key").get<std::string>() != key) return std::nullopt;
      return stats_from_json(j.at("stats"));
    } catch (const json::exception&) {
      return std::nullopt;
    }
  };
  hooks.save = [ckpt](const std::string& key, const AllocationStats& stats) {
    const auto p = ckpt / (hex16(fnv1a(key)) + ".json");
    const auto tmp = p.string() + ".tmp";
    {
      std::ofstream f(tmp);
      f << json{{"key", key}, {"stats", to_json(stats)}}.dump() << '\n';
    }
    fs::rename(tmp, p);
  };
  if (progress) {
    hooks.progress = [progress](const std::string& msg) { *progress << msg << std::endl; };
  }
  return hooks;
}

std::string experiment_id(const PolicySpec& spec, std::size_t index) {
  return std::string(to_string(spec.kind)) + "-" + std::to_string(index);
}

void emit_rows(OutputDir& dir, const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows) {
  if (cfg.format == "json") {
    dir.write_json("results.json", results_json(rows));
  } else {
    dir.write("results.csv", [&](std::ostream& os) { write_results_csv(os, rows); });
  }
}

void run_single(OutputDir& dir, const ExperimentConfig& cfg) {
  const auto inst = cfg.instance->build();
  const auto& spec = cfg.policies.front();
  const auto T = cfg.T.front();
  const auto records = run_trials(inst, spec, T, *cfg.n_trials, cfg.seed, 0, cfg.threads);
  const auto stats = summarize(records, inst, spec, T);
  const double delta = inst.gaps().size() > 1 ? inst.gaps()[1] : 0.0;
  std::vector<ExperimentRow> rows{{experiment_id(spec, 0), spec, T, delta, stats, std::nullopt}};
  emit_rows(dir, cfg, rows);

  std::vector<std::int64_t> n1;
  n1.reserve(records.size());
  for (const auto& r : records) n1.push_back(r.counts.front());
  const auto bins = histogram(n1, T);
  dir.write("histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, bins); });
}

std::vector<ExperimentRow> sweep_rows(const PolicySpec& spec, std::size_t index, std::int64_t T,
                                      const DeltaSweep& sweep, std::optional<double> rho) {
  std::vector<ExperimentRow> rows;
  for (const auto& r : sweep.rows) {
    rows.push_back({experiment_id(spec, index), spec, T, r.delta, r.stats, rho});
  }
  return rows;
}

void run_sweep(OutputDir& dir, const ExperimentConfig& cfg, std::ostream* progress) {
  const auto& spec = cfg.policies.front();
  const auto T = cfg.T.front();
  const auto hooks = checkpoint_hooks(dir, progress);
  const auto sweep = sweep_delta(spec, T, cfg.delta_grid, *cfg.n_trials, cfg.seed, cfg.threads, &hooks);
  emit_rows(dir, cfg, sweep_rows(spec, 0, T, sweep, std::nullopt));
  dir.write_json("sweep.json", to_json(sweep));
}

void run_pareto(OutputDir& dir, const ExperimentConfig& cfg, std::ostream* progress) {
  const auto hooks = checkpoint_hooks(dir, progress);
  const DeltaGrid grid{cfg.delta_grid_scaled, cfg.delta_grid};
  const auto frontier = pareto_sweep(cfg.gammas, cfg.T, grid, *cfg.n_trials, cfg.seed, cfg.threads, &hooks);
  dir.write("frontier.csv", [&](std::ostream& os) { write_frontier_csv(os, frontier, *cfg.n_trials); });
  dir.write("slopes.csv", [&](std::ostream& os) { write_slopes_csv(os, frontier); });
  std::vector<ExperimentRow> rows;
  for (std::size_t i = 0; i < frontier.rows.size(); ++i) {
    const auto& fr = frontier.rows[i];
    const auto spec = PolicySpec::ucbf(ExplorationFunction::power_log(fr.gamma));
    auto part = sweep_rows(spec, i, fr.T, fr.sweep, std::nullopt);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  emit_rows(dir, cfg, rows);
}

void run_fluid(OutputDir& dir, const ExperimentConfig& cfg) {
  const auto traj = fluid_trajectory(cfg.means, *cfg.f, cfg.T);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& s : traj) {
      arr.push_back({{"t", s.t}, {"f_t", s.f_t}, {"lambda", s.lambda}, {"n", s.n}, {"residual", s.residual}});
    }
    dir.write_json("fluid.json", arr);
  } else {
    dir.write("fluid.csv", [&](std::ostream& os) { write_fluid_csv(os, traj); });
  }
}

void run_pair(OutputDir& dir, const ExperimentConfig& cfg) {
  const auto report = check_instance_pair(cfg.policies.front(), *cfg.delta, cfg.T.front(),
                                          *cfg.n_trials, cfg.seed, cfg.threads);
  dir.write_json("pair_check.json", to_json(report));
}

void run_platform(OutputDir& dir, const ExperimentConfig& cfg, std::ostream* progress) {
  const auto T = cfg.T.front();
  const auto hooks = checkpoint_hooks(dir, progress);
  std::vector<ExperimentRow> rows;
  std::ostringstream summary;
  summary << "experiment_id,policy_kind,gamma,beta,a,T,rho,grid_worst_objective,worst_delta\n";
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    const auto& spec = cfg.policies[i];
    const auto sweep = sweep_delta(spec, T, cfg.delta_grid, *cfg.n_trials, cfg.seed, cfg.threads, &hooks);
    auto part = sweep_rows(spec, i, T, sweep, cfg.rho);
    rows.insert(rows.end(), part.begin(), part.end());
    double best = -1.0, best_delta = 0.0;
    for (const auto& r : sweep.rows) {
      const double v = platform_objective(r.stats, cfg.rho);
      if (v > best) {
        best = v;
        best_delta = r.delta;
      }
    }
    summary << experiment_id(spec, i) << ',' << to_string(spec.kind) << ','
            << (spec.f ? format_number(spec.f->gamma) : "") << ','
            << (spec.f ? format_number(spec.f->beta) : "") << ','
            << (spec.f ? format_number(spec.f->a) : "") << ',' << T << ','
            << format_number(cfg.rho) << ',' << format_number(best) << ',' << format_number(best_delta)
            << '\n';
  }
  emit_rows(dir, cfg, rows);
  dir.write("platform.csv", [&](std::ostream& os) { os << summary.str(); });
}

}  // namespace

std::vector<std::string> run(const ExperimentConfig& raw, std::ostream* progress) {
  const auto cfg = resolve(raw);
  OutputDir dir(cfg.out);

  switch (cfg.subcommand) {
    case Subcommand::simulate:
    case Subcommand::example1:
      run_single(dir, cfg);
      break;
    case Subcommand::sweep_delta:
      run_sweep(dir, cfg, progress);
      break;
    case Subcommand::pareto:
      run_pareto(dir, cfg, progress);
      break;
    case Subcommand::fluid:
      run_fluid(dir, cfg);
      break;
    case Subcommand::pair_check:
      run_pair(dir, cfg);
      break;
    case Subcommand::platform:
      run_platform(dir, cfg, progress);
      break;
  }

  json outputs = json::array();
  for (const auto& p : dir.written()) outputs.push_back(fs::path(p).filename().string());
  json manifest{{"tool", "allocvar"},
                {"version", std::string(kVersion)},
                {"config", to_json(cfg)},
                {"outputs", outputs}};
  if (cfg.subcommand == Subcommand::sweep_delta || cfg.subcommand == Subcommand::pareto ||
      cfg.subcommand == Subcommand::platform) {
    manifest["note"] = "worst-case metrics are maxima over the delta grid (grid-worst), "
                       "a lower bound on the supremum over the instance class";
  }
  dir.write_json("manifest.json", manifest);
  return dir.written();
}

int run_with_status(const ExperimentConfig& cfg, std::ostream& err, std::ostream* progress) {
  auto write_error = [&](const json& j) {
    err << j.dump() << '\n';
    std::error_code ec;
    if (!cfg.out.empty() && fs::is_directory(cfg.out, ec)) {
      std::ofstream f(fs::path(cfg.out) / "error.json");
      if (f) f << j.dump(2) << '\n';
    }
  };
  try {
    run(cfg, progress);
    return 0;
  } catch (const ConfigError& e) {
    write_error(e.to_json());
    return 2;
  } catch (const std::exception& e) {
    write_error(json{{"error", "runtime_failure"}, {"message", e.what()}});
    return 1;
  }
}

}  // namespace allocvar
