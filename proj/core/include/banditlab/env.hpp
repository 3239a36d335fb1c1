#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "banditlab/linalg.hpp"
#include "banditlab/rng.hpp"

namespace banditlab::env {

/// A k-armed linear bandit instance: fixed arm features, the ground-truth
/// parameter the rewards follow, the Gaussian noise scale, and the arm the
/// adversary wants promoted.
struct EnvironmentSpec {
  std::vector<linalg::Vec> arms;
  linalg::Vec theta_star;
  double noise_sigma = 0.0;
  int target_index = 0;

  int dim() const { return static_cast<int>(theta_star.size()); }
  int num_arms() const { return static_cast<int>(arms.size()); }
  const linalg::Vec& target() const { return arms.at(target_index); }

  /// Checks finiteness, k >= 2, target range, and the unit-norm bounds on
  /// arms and theta_star. Fixtures with larger norms pass only when
  /// allow_unnormalized is set.
  void validate(bool allow_unnormalized = false) const;
};

struct RewardDraw {
  int arm_index = 0;
  double mean = 0.0;
  double noise = 0.0;
  double realized = 0.0;  // mean + noise, exactly
};

RewardDraw draw_reward(const EnvironmentSpec& env, int arm, RngStreams& rng);

/// Random instance: per-dimension variances ~ U(0,1) shared by all arms,
/// arm coordinates ~ N(0, variance_j) then normalized to unit norm,
/// theta_star ~ N(0,1) coordinates normalized to unit norm, target uniform.
EnvironmentSpec sample_environment(int d, int k, double sigma, RngStreams& rng);

struct SampledEnvironment {
  EnvironmentSpec env;
  int tries = 0;
};

using EnvGenerator =
    std::function<EnvironmentSpec(int, int, double, RngStreams&)>;

/// Re-samples environments (target re-drawn each try) until the exact/convex
/// certificate reports a strictly positive attackability index, at least
/// min_index when a margin is requested. Throws ExhaustedTries after
/// max_tries rejections. The generator hook exists so tests can feed
/// adversarial families; it defaults to sample_environment.
SampledEnvironment sample_attackable_environment(int d, int k, double sigma,
                                                 RngStreams& rng,
                                                 int max_tries = 1000,
                                                 EnvGenerator generator = {},
                                                 double min_index = 0.0);

void save_instance(const EnvironmentSpec& env, const std::filesystem::path& path);
EnvironmentSpec load_instance(const std::filesystem::path& path,
                              bool allow_unnormalized = false);

}  // namespace banditlab::env
