#include "allocvar/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "allocvar/config.hpp"
#include "allocvar/errors.hpp"

namespace allocvar {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

std::string gamma_cell(const PolicySpec& spec) {
  return spec.f ? format_number(spec.f->gamma) : std::string();
}
std::string beta_cell(const PolicySpec& spec) {
  return spec.f ? format_number(spec.f->beta) : std::string();
}
std::string a_cell(const PolicySpec& spec) {
  return spec.f ? format_number(spec.f->a) : std::string();
}

}  // namespace

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols{
      "experiment_id", "policy_kind",   "gamma",         "beta",          "a",
      "T",             "n_trials",      "delta",         "arm",           "mean_count",
      "sd_count",      "ci_halfwidth",  "S_T_hat",       "R_T_hat",       "sd_regret_hat",
      "dispersion_ratio", "objective_rho", "objective_value"};
  return cols;
}

void write_results_csv(std::ostream& os, std::span<const ExperimentRow> rows) {
  write_header(os, results_columns());
  for (const auto& row : rows) {
    const auto& s = row.stats;
    std::vector<std::string> base{row.experiment_id,
                                  std::string(to_string(row.spec.kind)),
                                  gamma_cell(row.spec),
                                  beta_cell(row.spec),
                                  a_cell(row.spec),
                                  std::to_string(row.T),
                                  std::to_string(s.n_trials),
                                  format_number(row.delta)};
    for (std::size_t i = 0; i < s.mean_counts.size(); ++i) {
      auto cells = base;
      cells.push_back(std::to_string(i + 1));
      cells.push_back(format_number(s.mean_counts[i]));
      cells.push_back(format_number(s.sd_counts[i]));
      cells.push_back(format_number(s.ci_halfwidths[i]));
      cells.resize(results_columns().size());
      write_row(os, cells);
    }
    auto cells = base;
    cells.insert(cells.end(), {"all", "", "", "", format_number(s.S_T_hat), format_number(s.R_T_hat),
                               format_number(s.sd_regret_hat), format_number(s.dispersion_ratio)});
    if (row.objective_rho) {
      cells.push_back(format_number(*row.objective_rho));
      cells.push_back(format_number(platform_objective(s, *row.objective_rho)));
    } else {
      cells.insert(cells.end(), {"", ""});
    }
    write_row(os, cells);
  }
}

json results_json(std::span<const ExperimentRow> rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json j{{"experiment_id", row.experiment_id},
           {"policy", to_json(row.spec)},
           {"T", row.T},
           {"delta", row.delta},
           {"stats", to_json(row.stats)}};
    if (row.objective_rho) {
      j["objective_rho"] = *row.objective_rho;
      j["objective_value"] = platform_objective(row.stats, *row.objective_rho);
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<HistogramBin> histogram(std::span<const std::int64_t> values, std::int64_t T, int bins) {
  if (T < 1) throw ParameterError("histogram: T must be >= 1");
  if (bins < 1) throw ParameterError("histogram: bins must be >= 1");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  const double width = static_cast<double>(T) / bins;
  for (int b = 0; b < bins; ++b) {
    out[b].left = b * width;
    out[b].right = b + 1 == bins ? static_cast<double>(T) : (b + 1) * width;
  }
  for (auto v : values) {
    if (v < 0 || v > T) throw ParameterError("histogram: value outside [0, T]");
    // Integer arithmetic keeps the bin edges exact: v lands in bin floor(v * bins / T).
    auto b = static_cast<std::int64_t>((static_cast<__int128>(v) * bins) / T);
    if (b == bins) b = bins - 1;
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

void write_histogram_csv(std::ostream& os, std::span<const HistogramBin> bins) {
  write_header(os, {"bin_left", "bin_right", "count"});
  for (const auto& b : bins) {
    write_row(os, {format_number(b.left), format_number(b.right), std::to_string(b.count)});
  }
}

const std::vector<std::string>& frontier_columns() {
  static const std::vector<std::string> cols{
      "gamma", "T", "n_trials", "worst_R", "worst_R_delta", "worst_S", "worst_S_delta",
      "worst_sd_regret", "worst_sd_regret_delta", "log_T", "log_worst_R", "log_worst_S"};
  return cols;
}

void write_frontier_csv(std::ostream& os, const Frontier& frontier, std::int64_t n_trials) {
  write_header(os, frontier_columns());
  for (const auto& r : frontier.rows) {
    const auto& w = r.worst;
    write_row(os, {format_number(r.gamma), std::to_string(r.T), std::to_string(n_trials),
                   format_number(w.R), format_number(w.R_delta), format_number(w.S),
                   format_number(w.S_delta), format_number(w.sd_regret),
                   format_number(w.sd_regret_delta), format_number(std::log(static_cast<double>(r.T))),
                   format_number(std::log(w.R)), format_number(std::log(w.S))});
  }
}

const std::vector<std::string>& slopes_columns() {
  static const std::vector<std::string> cols{"gamma", "slope_R", "slope_S", "slope_product",
                                             "slope_sd_regret"};
  return cols;
}

void write_slopes_csv(std::ostream& os, const Frontier& frontier) {
  write_header(os, slopes_columns());
  for (const auto& s : frontier.slopes) {
    write_row(os, {format_number(s.gamma), format_number(s.R), format_number(s.S),
                   format_number(s.product), format_number(s.sd_regret)});
  }
}

void write_fluid_csv(std::ostream& os, std::span<const FluidSolution> solutions) {
  const std::size_t K = solutions.empty() ? 0 : solutions.front().n.size();
  std::vector<std::string> cols{"t", "f_t", "lambda"};
  for (std::size_t i = 0; i < K; ++i) cols.push_back("n_" + std::to_string(i + 1));
  cols.push_back("residual");
  write_header(os, cols);
  for (const auto& s : solutions) {
    std::vector<std::string> cells{format_number(s.t), format_number(s.f_t), format_number(s.lambda)};
    for (double n : s.n) cells.push_back(format_number(n));
    cells.push_back(format_number(s.residual));
    write_row(os, cells);
  }
}

json to_json(const PairReport& r) {
  const bool lemma = r.lemma_holds;
  return {{"policy", to_json(r.spec)},
          {"T", r.T},
          {"n_trials", r.n_trials},
          {"delta", r.delta},
          {"delta_prime", r.delta_prime},
          {"g_hat", r.g_hat},
          {"g_se", r.g_se},
          {"S_hat", r.S_hat},
          {"S_se", r.S_se},
          {"lhs", r.lhs},
          {"lhs_se", r.lhs_se},
          {"rhs", r.rhs},
          {"rhs_se", r.rhs_se},
          {"lemma_slack", r.lhs - r.rhs},
          {"midpoint", r.midpoint},
          {"upper_instance", r.upper_instance},
          {"p_below", r.p_below},
          {"p_at_or_above", r.p_at_or_above},
          {"bh_lhs", r.bh_lhs},
          {"bh_lhs_se", r.bh_lhs_se},
          {"kl_forward", r.kl_forward},
          {"kl_reverse", r.kl_reverse},
          {"bh_rhs", r.bh_rhs},
          {"bh_slack", r.bh_lhs - r.bh_rhs},
          {"lemma_holds", lemma},
          {"bh_holds", r.bh_holds}};
}

json to_json(const DeltaSweep& sweep) {
  json rows = json::array();
  for (const auto& r : sweep.rows) rows.push_back({{"delta", r.delta}, {"stats", to_json(r.stats)}});
  const auto w = sweep.worst();
  return {{"rows", rows},
          {"grid_worst",
           {{"R", w.R}, {"R_delta", w.R_delta}, {"S", w.S}, {"S_delta", w.S_delta},
            {"sd_regret", w.sd_regret}, {"sd_regret_delta", w.sd_regret_delta}}},
          {"argmax_S", sweep.argmax_S},
          {"argmax_R", sweep.argmax_R},
          {"argmax_sd_regret", sweep.argmax_sd_regret}};
}

}  // namespace allocvar
