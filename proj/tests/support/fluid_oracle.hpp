#pragma once

// Reference solver for the fluid level equation, kept deliberately naive:
// plain bisection on the level itself over a wide bracket, no shared code
// with the library.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct FluidPoint {
  double lambda;
  std::vector<double> n;
};

inline FluidPoint solve_fluid(const std::vector<double>& means, double f_t, double t) {
  const double best = *std::max_element(means.begin(), means.end());
  auto total = [&](double lambda) {
    double s = 0.0;
    for (double m : means) s += (f_t / (lambda - m)) * (f_t / (lambda - m));
    return s;
  };
  double lo = best;
  double hi = best + 1.0;
  while (total(hi) > t) hi = best + 2.0 * (hi - best);
  for (int i = 0; i < 2000 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (total(mid) > t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  FluidPoint p{0.5 * (lo + hi), {}};
  for (double m : means) p.n.push_back((f_t / (p.lambda - m)) * (f_t / (p.lambda - m)));
  return p;
}

}  // namespace oracle
