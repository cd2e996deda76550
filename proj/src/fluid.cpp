#include "allocvar/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "allocvar/errors.hpp"

namespace allocvar {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRelativeTolerance = 1e-12;

}  // namespace

// Writing lambda = mu* + x with x > 0 and gap_i = mu* - mu_i, the system
// becomes n_i = (f_t / (x + gap_i))^2 with sum_i n_i(x) = t. The left side
// is strictly decreasing in x, so the root is unique. Bracket:
//   x_lo = f_t / sqrt(t):     the best arm alone already takes n = t, and
//                             every other arm adds a positive amount, so
//                             sum > t.
//   x_hi = f_t * sqrt(K / t): every arm gets at most t/K, so sum <= t.
// Solving for the offset x rather than lambda itself keeps full relative
// precision when lambda sits close to mu*.
FluidSolution solve_fluid(std::span<const double> means, double f_t, double t) {
  const std::size_t K = means.size();
  if (K < 2) throw ParameterError("solve_fluid: need at least two arms");
  if (!(f_t > 0.0) || !std::isfinite(f_t)) throw ParameterError("solve_fluid: f_t must be positive");
  if (!(t >= static_cast<double>(K))) throw ParameterError("solve_fluid: t must be >= K");
  for (double m : means) {
    if (!std::isfinite(m)) throw ParameterError("solve_fluid: means must be finite");
  }

  const double best = *std::max_element(means.begin(), means.end());
  std::vector<double> gaps(K);
  for (std::size_t i = 0; i < K; ++i) gaps[i] = best - means[i];

  auto excess = [&](double x) {
    double total = 0.0;
    for (double g : gaps) {
      const double r = f_t / (x + g);
      total += r * r;
    }
    return total - t;
  };

  double lo = f_t / std::sqrt(t);
  double hi = f_t * std::sqrt(static_cast<double>(K) / t);
  // All-equal means put the root exactly on x_hi, where rounding may leave
  // a tiny positive excess.
  if (!(excess(lo) > 0.0) || excess(hi) > 1e-12 * t) {
    throw InternalError("solve_fluid: bracket does not contain the root");
  }

  FluidSolution sol;
  int it = 0;
  while (it < kMaxIterations) {
    ++it;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= kRelativeTolerance * hi) break;
  }
  if (it >= kMaxIterations && hi - lo > kRelativeTolerance * hi) {
    throw InternalError("solve_fluid: bisection did not converge");
  }

  // Pick whichever end of the final bracket balances the budget best.
  const double x = std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi;
  sol.n.resize(K);
  double total = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double r = f_t / (x + gaps[i]);
    sol.n[i] = r * r;
    total += sol.n[i];
  }
  sol.lambda = best + x;
  sol.residual = std::abs(total - t);
  sol.t = t;
  sol.f_t = f_t;
  sol.iterations = it;
  return sol;
}

std::vector<FluidSolution> fluid_trajectory(std::span<const double> means,
                                            const ExplorationFunction& f,
                                            std::span<const std::int64_t> t_grid) {
  std::vector<FluidSolution> out;
  out.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (k > 0 && t_grid[k] <= t_grid[k - 1]) {
      throw ParameterError("fluid_trajectory: grid must be strictly increasing");
    }
    const auto t = static_cast<double>(t_grid[k]);
    out.push_back(solve_fluid(means, f(t), t));
  }
  return out;
}

double predicted_variability_bound(double n2, double f_T, std::int64_t T, std::int64_t K) {
  if (!(n2 > 0.0) || !(f_T > 0.0) || T < 1 || K < 1) {
    throw ParameterError("predicted_variability_bound: arguments must be positive");
  }
  return std::sqrt(2.0) * static_cast<double>(K - 1) * std::log(static_cast<double>(T)) * n2 / f_T;
}

}  // namespace allocvar
