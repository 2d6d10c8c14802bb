#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace c3 {

/// Counter-based 64-bit generator: output i is a SplitMix64 finalizer applied
/// to key + (i + 1) * golden. Substreams derive a fresh key from the parent key
/// and a label, so streams for different purposes never share draws.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  CounterRng substream(std::string_view label) const;
  CounterRng substream(std::uint64_t index) const;

  double uniform();  // [0, 1)
  double normal();   // standard normal
  bool bernoulli(double p);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  CounterRng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace c3
