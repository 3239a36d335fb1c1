#pragma once

#include <cstdint>
#include <random>

namespace banditlab::env {

/// Deterministic pseudo-random stream. All distributions are implemented
/// explicitly (not via std:: distributions) so that a master seed produces
/// bitwise-identical draws across compilers and standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Gaussian via Box-Muller (one value per call, partner discarded).
  double normal(double mean, double stddev);

  /// Uniform integer on [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Independent substreams for the environment (reward noise), the adversary
/// (attack noise), and the instance sampler. Same master seed, same run.
struct RngStreams {
  RngStream env_stream;
  RngStream attack_stream;
  RngStream sampler_stream;

  explicit RngStreams(std::uint64_t master_seed);
};

}  // namespace banditlab::env
