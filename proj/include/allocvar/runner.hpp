#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "allocvar/config.hpp"

namespace allocvar {

/// Executes a resolved config, writing the manifest and result files under
/// cfg.out. Returns the paths written. Throws ConfigError for invalid
/// configs or an unusable output directory; anything else is a runtime failure.
std::vector<std::string> run(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

/// Runs and maps the outcome to an exit status: 0 success, 2 invalid config,
/// 1 runtime failure. On failure a machine-readable error JSON is written to
/// `err` (and to <out>/error.json when the directory is usable).
int run_with_status(const ExperimentConfig& cfg, std::ostream& err,
                    std::ostream* progress = nullptr);

}  // namespace allocvar
