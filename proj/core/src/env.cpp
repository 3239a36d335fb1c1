#include "banditlab/env.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "banditlab/errors.hpp"

namespace banditlab::env {

namespace {
constexpr double kNormSlack = 1e-9;
}

void EnvironmentSpec::validate(bool allow_unnormalized) const {
  if (arms.size() < 2) {
    throw ParseError("instance: need at least 2 arms, got " +
                     std::to_string(arms.size()));
  }
  if (theta_star.size() == 0 || !theta_star.allFinite()) {
    throw ParseError("instance: theta_star must be finite and non-empty");
  }
  const auto d = theta_star.size();
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (arms[a].size() != d) {
      throw ParseError("instance: arm " + std::to_string(a) + " has dimension " +
                       std::to_string(arms[a].size()) + ", expected " +
                       std::to_string(d));
    }
    if (!arms[a].allFinite()) {
      throw ParseError("instance: arm " + std::to_string(a) + " has non-finite entries");
    }
    if (!allow_unnormalized && arms[a].norm() > 1.0 + kNormSlack) {
      throw ParseError("instance: arm " + std::to_string(a) + " has norm " +
                       std::to_string(arms[a].norm()) +
                       " > 1 (use allow_unnormalized to load anyway)");
    }
  }
  if (!allow_unnormalized && theta_star.norm() > 1.0 + kNormSlack) {
    throw ParseError("instance: theta_star has norm " +
                     std::to_string(theta_star.norm()) +
                     " > 1 (use allow_unnormalized to load anyway)");
  }
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) {
    throw ParseError("instance: sigma must be a finite value >= 0");
  }
  if (target_index < 0 || target_index >= num_arms()) {
    throw ParseError("instance: target_index " + std::to_string(target_index) +
                     " out of range [0, " + std::to_string(num_arms()) + ")");
  }
}

RewardDraw draw_reward(const EnvironmentSpec& env, int arm, RngStreams& rng) {
  if (arm < 0 || arm >= env.num_arms()) {
    throw IndexOutOfRange("draw_reward: arm " + std::to_string(arm) +
                          " out of range [0, " + std::to_string(env.num_arms()) + ")");
  }
  RewardDraw draw;
  draw.arm_index = arm;
  draw.mean = env.arms[arm].dot(env.theta_star);
  draw.noise = rng.env_stream.normal(0.0, env.noise_sigma);
  draw.realized = draw.mean + draw.noise;
  return draw;
}

EnvironmentSpec sample_environment(int d, int k, double sigma, RngStreams& rng) {
  if (d < 2 || k < 2) {
    throw ConfigError("sample_environment: need d >= 2 and k >= 2");
  }
  auto& gen = rng.sampler_stream;
  linalg::Vec stddevs(d);
  for (int j = 0; j < d; ++j) stddevs(j) = std::sqrt(gen.uniform01());

  EnvironmentSpec env;
  env.noise_sigma = sigma;
  env.arms.reserve(k);
  for (int a = 0; a < k; ++a) {
    linalg::Vec x(d);
    double norm = 0.0;
    do {
      for (int j = 0; j < d; ++j) x(j) = gen.normal(0.0, stddevs(j));
      norm = x.norm();
    } while (norm < 1e-12);
    env.arms.push_back(x / norm);
  }
  linalg::Vec theta(d);
  double tnorm = 0.0;
  do {
    for (int j = 0; j < d; ++j) theta(j) = gen.normal(0.0, 1.0);
    tnorm = theta.norm();
  } while (tnorm < 1e-12);
  env.theta_star = theta / tnorm;
  env.target_index = static_cast<int>(gen.uniform_int(0, k - 1));
  return env;
}

// sample_attackable_environment lives in attackability.cpp: the acceptance
// test is the convex certificate computed there.

void save_instance(const EnvironmentSpec& env, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["d"] = env.dim();
  j["k"] = env.num_arms();
  j["sigma"] = env.noise_sigma;
  j["arms"] = nlohmann::json::array();
  for (const auto& x : env.arms) {
    j["arms"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  j["theta_star"] =
      std::vector<double>(env.theta_star.data(), env.theta_star.data() + env.theta_star.size());
  j["target_index"] = env.target_index;

  std::ofstream out(path);
  if (!out) throw ParseError("save_instance: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

EnvironmentSpec load_instance(const std::filesystem::path& path,
                              bool allow_unnormalized) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_instance: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_instance: " + path.string() + ": " + e.what());
  }

  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!j.contains(field)) {
      throw ParseError("load_instance: " + path.string() + ": missing field '" +
                       field + "'");
    }
    return j.at(field);
  };

  EnvironmentSpec env;
  int d = 0, k = 0;
  try {
    d = require("d").get<int>();
    k = require("k").get<int>();
    env.noise_sigma = require("sigma").get<double>();
    env.target_index = require("target_index").get<int>();
    const auto& arms = require("arms");
    const auto& theta = require("theta_star");
    if (static_cast<int>(arms.size()) != k) {
      throw ParseError("load_instance: header says k=" + std::to_string(k) +
                       " but arms has " + std::to_string(arms.size()) + " rows");
    }
    if (static_cast<int>(theta.size()) != d) {
      throw ParseError("load_instance: header says d=" + std::to_string(d) +
                       " but theta_star has length " + std::to_string(theta.size()));
    }
    env.theta_star = linalg::Vec(d);
    for (int i = 0; i < d; ++i) env.theta_star(i) = theta.at(i).get<double>();
    env.arms.reserve(k);
    for (int a = 0; a < k; ++a) {
      const auto& row = arms.at(a);
      if (static_cast<int>(row.size()) != d) {
        throw ParseError("load_instance: arm " + std::to_string(a) + " has " +
                         std::to_string(row.size()) + " entries, expected " +
                         std::to_string(d));
      }
      linalg::Vec x(d);
      for (int i = 0; i < d; ++i) x(i) = row.at(i).get<double>();
      env.arms.push_back(std::move(x));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_instance: " + path.string() + ": " + e.what());
  }
  env.validate(allow_unnormalized);
  return env;
}

}  // namespace banditlab::env
