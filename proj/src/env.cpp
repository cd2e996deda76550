#include "allocvar/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "allocvar/errors.hpp"

namespace allocvar {

ArmDistribution ArmDistribution::gaussian(double mean, double scale) {
  if (!std::isfinite(mean)) throw ParameterError("gaussian arm: mean must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("gaussian arm: scale must be positive and finite");
  }
  return ArmDistribution(ArmKind::gaussian, mean, scale);
}

ArmDistribution ArmDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("bernoulli arm: p must lie in [0, 1]");
  return ArmDistribution(ArmKind::bernoulli, p, std::sqrt(p * (1.0 - p)));
}

double ArmDistribution::sub_gaussian_parameter() const noexcept {
  return kind_ == ArmKind::gaussian ? scale_ : 0.5;
}

BanditInstance::BanditInstance(std::vector<ArmDistribution> arms, InstanceClass cls)
    : arms_(std::move(arms)), class_(cls) {
  if (!arms_.empty()) {
    const double best = best_mean();
    gaps_.reserve(arms_.size());
    for (const auto& a : arms_) gaps_.push_back(best - a.mean());
  }
}

std::vector<double> BanditInstance::means() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& a : arms_) out.push_back(a.mean());
  return out;
}

double BanditInstance::best_mean() const {
  if (arms_.empty()) throw StateError("instance has no arms");
  return std::max_element(arms_.begin(), arms_.end(),
                          [](const auto& l, const auto& r) { return l.mean() < r.mean(); })
      ->mean();
}

ValidationReport validate_instance(const BanditInstance& inst) {
  ValidationReport report;
  const auto& cls = inst.instance_class();
  const std::size_t K = inst.size();
  if (!(cls.M > 0.0)) report.violations.emplace_back("class M must be positive");
  if (!(cls.sigma > 0.0)) report.violations.emplace_back("class sigma must be positive");
  if (cls.Kbar < 2) report.violations.emplace_back("class Kbar must be at least 2");
  if (K < 2) report.violations.emplace_back("K < 2");
  if (K > static_cast<std::size_t>(std::max(cls.Kbar, 0))) {
    report.violations.emplace_back("K > Kbar");
  }
  for (std::size_t i = 0; i < K; ++i) {
    const auto& a = inst.arm(i);
    if (std::abs(a.mean()) > cls.M) {
      std::ostringstream os;
      os << "arm " << i + 1 << ": mean outside [-M, M]";
      report.violations.push_back(os.str());
    }
    if (a.sub_gaussian_parameter() > cls.sigma) {
      std::ostringstream os;
      os << "arm " << i + 1 << ": sub-Gaussian parameter exceeds sigma";
      report.violations.push_back(os.str());
    }
  }
  return report;
}

BanditInstance make_gap_instance(double delta, InstanceClass cls) {
  if (!(delta >= 0.0)) throw ParameterError("gap instance: delta must be >= 0");
  if (delta > 2.0 * cls.M) throw ParameterError("gap instance: delta must be <= 2M");
  return BanditInstance({ArmDistribution::gaussian(0.0, 1.0),
                         ArmDistribution::gaussian(-delta, 1.0)},
                        cls);
}

}  // namespace allocvar
