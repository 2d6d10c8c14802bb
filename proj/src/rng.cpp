#include "c3/rng.hpp"

namespace c3 {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

CounterRng CounterRng::substream(std::string_view label) const {
  return CounterRng(mix64(key_ ^ mix64(fnv1a(label))), 0, 0);
}

CounterRng CounterRng::substream(std::uint64_t index) const {
  return CounterRng(mix64(key_ ^ mix64(index * kGolden + 0x632BE59BD9B4E019ULL)), 0, 0);
}

double CounterRng::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() { return normal_(*this); }

bool CounterRng::bernoulli(double p) { return uniform() < p; }

}  // namespace c3
