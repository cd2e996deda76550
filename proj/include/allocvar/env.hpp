#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "allocvar/rng.hpp"

namespace allocvar {

enum class ArmKind { gaussian, bernoulli };

/// Reward law of a single arm. Immutable once built; the factories reject
/// invalid parameters, so every live instance satisfies its invariants.
class ArmDistribution {
 public:
  static ArmDistribution gaussian(double mean, double scale);
  static ArmDistribution bernoulli(double p);

  ArmKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  /// Standard deviation for Gaussian arms; sqrt(p(1-p)) for Bernoulli arms.
  double scale() const noexcept { return scale_; }
  double p() const noexcept { return mean_; }

  /// Gaussian arms are scale-sub-Gaussian, Bernoulli arms 1/2-sub-Gaussian.
  double sub_gaussian_parameter() const noexcept;

  double sample(RandomStream& rng) const {
    if (kind_ == ArmKind::gaussian) return rng.normal(mean_, scale_);
    return rng.uniform() < mean_ ? 1.0 : 0.0;
  }

  bool operator==(const ArmDistribution&) const = default;

 private:
  ArmDistribution(ArmKind kind, double mean, double scale)
      : kind_(kind), mean_(mean), scale_(scale) {}

  ArmKind kind_;
  double mean_;
  double scale_;
};

/// Parameters (M, sigma, Kbar) of the sub-Gaussian instance class.
struct InstanceClass {
  double M = 2.0;
  double sigma = 1.0;
  int Kbar = 16;

  bool operator==(const InstanceClass&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// An ordered list of arms together with the class it is meant to belong to.
/// Class membership is not enforced here; see validate_instance.
class BanditInstance {
 public:
  BanditInstance() = default;
  explicit BanditInstance(std::vector<ArmDistribution> arms,
                          InstanceClass cls = {});

  const std::vector<ArmDistribution>& arms() const noexcept { return arms_; }
  const ArmDistribution& arm(std::size_t i) const { return arms_.at(i); }
  std::size_t size() const noexcept { return arms_.size(); }
  const InstanceClass& instance_class() const noexcept { return class_; }

  std::vector<double> means() const;
  double best_mean() const;
  /// gaps()[i] = max_j mean_j - mean_i.
  const std::vector<double>& gaps() const noexcept { return gaps_; }

  bool operator==(const BanditInstance& other) const {
    return arms_ == other.arms_ && class_ == other.class_;
  }

 private:
  std::vector<ArmDistribution> arms_;
  InstanceClass class_;
  std::vector<double> gaps_;
};

/// Lists every way `inst` falls outside P_sg(M, sigma, Kbar).
ValidationReport validate_instance(const BanditInstance& inst);

/// Two-armed Gaussian family {N(0,1), N(-delta,1)}.
BanditInstance make_gap_instance(double delta, InstanceClass cls = {});

}  // namespace allocvar
