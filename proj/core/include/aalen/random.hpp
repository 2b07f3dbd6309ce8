#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aalen {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for stream `stream_id` under a master seed. Distinct ids give
/// statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream_id) noexcept {
  return mix64(mix64(master) ^ mix64(stream_id + 0x9e3779b97f4a7c15ULL));
}

/**
 * Counter-based random stream.
 *
 * The i-th draw is a pure function of (key, i), so a stream can be
 * re-created anywhere from (master seed, stream id) and replicates can run
 * in any order or on any thread without changing their output. Satisfies
 * UniformRandomBitGenerator so it plugs into <random> distributions.
 */
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : key_(derive_seed(seed, stream_id)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  /// Independent child stream.
  [[nodiscard]] Stream split(std::uint64_t id) const noexcept {
    return Stream(key_, id);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1); safe to take logs of.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) noexcept {
    return -std::log(uniform_open()) / rate;
  }

  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(*this);
  }

  /// Gamma(shape, rate).
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> d(shape, 1.0 / rate);
    return d(*this);
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace aalen
