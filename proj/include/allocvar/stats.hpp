#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace allocvar {

/// Welford accumulator with Chan et al. pairwise merge.
class RunningStats {
 public:
  void push(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) noexcept {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const auto na = static_cast<double>(n_);
    const auto nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
  }

  std::int64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Bessel-corrected; 0 for fewer than two samples.
  double variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double sd() const noexcept { return std::sqrt(variance()); }
  double standard_error() const noexcept {
    return n_ > 0 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Slope of ln(y) against ln(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace allocvar
