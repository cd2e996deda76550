#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "allocvar/fluid.hpp"
#include "allocvar/sim.hpp"
#include "allocvar/theory.hpp"

namespace allocvar {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

/// One experiment (policy x instance x horizon) ready for emission.
struct ExperimentRow {
  std::string experiment_id;
  PolicySpec spec;
  std::int64_t T = 0;
  double delta = 0.0;
  AllocationStats stats;
  std::optional<double> objective_rho;
};

/// Column order of the results CSV. Per-arm rows fill the first twelve
/// columns; the per-experiment summary row has arm = "all" and fills the
/// summary columns instead.
const std::vector<std::string>& results_columns();
void write_results_csv(std::ostream& os, std::span<const ExperimentRow> rows);
nlohmann::json results_json(std::span<const ExperimentRow> rows);

/// `bins` equal-width bins over [0, T]; the last bin is closed on the right.
struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::int64_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const std::int64_t> values, std::int64_t T,
                                    int bins = 100);
void write_histogram_csv(std::ostream& os, std::span<const HistogramBin> bins);

const std::vector<std::string>& frontier_columns();
void write_frontier_csv(std::ostream& os, const Frontier& frontier, std::int64_t n_trials);
const std::vector<std::string>& slopes_columns();
void write_slopes_csv(std::ostream& os, const Frontier& frontier);

void write_fluid_csv(std::ostream& os, std::span<const FluidSolution> solutions);

nlohmann::json to_json(const PairReport& report);
nlohmann::json to_json(const DeltaSweep& sweep);

}  // namespace allocvar
