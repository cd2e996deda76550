#include "allocvar/stats.hpp"

#include <vector>

#include "allocvar/errors.hpp"

namespace allocvar {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("least_squares: length mismatch");
  if (x.size() < 2) throw ParameterError("least_squares: need at least two points");
  RunningStats sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.push(x[i]);
    sy.push(y[i]);
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - sx.mean();
    sxy += dx * (y[i] - sy.mean());
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw ParameterError("least_squares: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = sy.mean() - fit.slope * sx.mean();
  return fit;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("loglog_slope: length mismatch");
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ParameterError("loglog_slope: values must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

}  // namespace allocvar
