#include "banditlab/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "banditlab/errors.hpp"

namespace banditlab::env {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (tag + 1));
  std::uint64_t out = splitmix64(s);
  out ^= splitmix64(s);
  return out;
}

}  // namespace

double RngStream::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double stddev) {
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw IndexOutOfRange("uniform_int: empty range");
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit span
  const std::uint64_t limit =
      (std::numeric_limits<std::uint64_t>::max() / range) * range;
  std::uint64_t r;
  do {
    r = gen_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % range);
}

RngStreams::RngStreams(std::uint64_t master_seed)
    : env_stream(derive_seed(master_seed, 1)),
      attack_stream(derive_seed(master_seed, 2)),
      sampler_stream(derive_seed(master_seed, 3)) {}

}  // namespace banditlab::env
