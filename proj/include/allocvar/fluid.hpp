#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "allocvar/policies.hpp"

namespace allocvar {

/// Deterministic pull-count benchmark n^t: the real-valued allocation that
/// equalizes every UCB index mean_i + f_t / sqrt(n_i) at a common level
/// `lambda` while spending exactly t pulls.
struct FluidSolution {
  std::vector<double> n;
  double lambda = 0.0;
  /// |sum(n) - t| after the solve.
  double residual = 0.0;
  double t = 0.0;
  double f_t = 0.0;
  int iterations = 0;
};

/// Solves the fluid balance system. Throws ParameterError for K < 2,
/// f_t <= 0 or t < K.
FluidSolution solve_fluid(std::span<const double> means, double f_t, double t);

/// One solution per grid point with f_t = f(t). The grid must be strictly
/// increasing with every entry >= K.
std::vector<FluidSolution> fluid_trajectory(std::span<const double> means,
                                            const ExplorationFunction& f,
                                            std::span<const std::int64_t> t_grid);

/// sqrt(2) (K-1) ln(T) n2 / f_T: the standard-deviation ceiling on pull counts
/// that the UCB-f variance argument yields.
double predicted_variability_bound(double n2, double f_T, std::int64_t T, std::int64_t K);

}  // namespace allocvar
