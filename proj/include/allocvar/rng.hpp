#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace allocvar {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation: the seed of stream `stream_id` under
/// `master` depends only on the pair, never on the order streams are used.
constexpr std::uint64_t split_seed(std::uint64_t master,
                                   std::uint64_t stream_id) noexcept {
  return mix64(mix64(master) ^ mix64(stream_id ^ 0x6a09e667f3bcc909ULL));
}

/// Stream id used by delta sweeps: delta index in the high word, trial in the low.
constexpr std::uint64_t sweep_stream_id(std::uint64_t delta_index,
                                        std::uint64_t trial_index) noexcept {
  return (delta_index << 32) + trial_index;
}

/// A reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Variates are produced by fixed algorithms so that a stream
/// replays bit-identically on every platform:
///   - uniform(): top 53 bits of one engine word, scaled to [0, 1);
///   - normal(): Boost.Random's ziggurat (normal_distribution);
///   - beta(): ratio of two Boost.Random gamma variates;
///   - index(n): Lemire's multiply-shift with rejection.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

  double beta(double a, double b) {
    return boost::random::beta_distribution<double>(a, b)(engine_);
  }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    const auto bound = static_cast<std::uint64_t>(n);
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace allocvar
