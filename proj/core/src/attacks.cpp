#include "banditlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banditlab/errors.hpp"

namespace banditlab::attacks {

void AttackLedger::record(long round, int arm_index, bool is_target,
                          double true_reward, double fed_reward, int phase) {
  LedgerEntry e;
  e.round = round;
  e.arm_index = arm_index;
  e.is_target = is_target;
  e.true_reward = true_reward;
  e.fed_reward = fed_reward;
  e.delta = fed_reward - true_reward;
  cum_cost_ += std::abs(e.delta);
  if (is_target) {
    ++target_pulls_;
    gamma_realized_ = std::max(gamma_realized_, std::abs(e.delta));
  } else {
    s_prime_ += std::abs(e.delta);
  }
  e.cum_cost = cum_cost_;
  e.cum_target_pulls = target_pulls_;
  e.phase = phase;
  entries_.push_back(e);
}

double AttackLedger::cost_between(long t0, long t1) const {
  double total = 0.0;
  for (const auto& e : entries_) {
    if (e.round > t0 && e.round <= t1) total += std::abs(e.delta);
  }
  return total;
}

OracleNullSpaceAttack::OracleNullSpaceAttack(
    const env::EnvironmentSpec& env,
    const attackability::AttackabilityReport& report, double attack_noise_sigma)
    : arms_(env.arms), target_index_(env.target_index), sigma_(attack_noise_sigma) {
  if (!report.attackable) {
    throw ConfigError("OracleNullSpaceAttack: environment not certified attackable");
  }
  const auto proj = attackability::project_parallel(env, env.theta_star);
  theta_tilde_ = proj.theta_parallel + report.certificate;
}

double OracleNullSpaceAttack::intercept(long round, int arm_index,
                                        double true_reward,
                                        env::RngStream& attack_stream,
                                        AttackLedger& ledger) {
  const bool is_target = arm_index == target_index_;
  double fed = true_reward;
  if (!is_target) {
    fed = arms_.at(arm_index).dot(theta_tilde_) +
          attack_stream.normal(0.0, sigma_);
  }
  ledger.record(round, arm_index, is_target, true_reward, fed, 2);
  return fed;
}

double compensation_reward(long n_target, double target_dot_tilde,
                           double target_dot_theta0, double attack_noise) {
  return static_cast<double>(n_target) * (target_dot_tilde - target_dot_theta0) +
         target_dot_tilde + attack_noise;
}

double estimate_error_bound(long n, double R, double delta) {
  if (n < 1) throw ConfigError("estimate_error_bound: n must be >= 1");
  return std::sqrt(2.0 * R * R * std::log(1.0 / delta) / static_cast<double>(n));
}

TwoStageNullSpaceAttack::TwoStageNullSpaceAttack(std::vector<linalg::Vec> arms,
                                                 int target_index, Options opt)
    : arms_(std::move(arms)), target_index_(target_index), opt_(opt) {
  if (target_index_ < 0 || target_index_ >= static_cast<int>(arms_.size())) {
    throw IndexOutOfRange("TwoStageNullSpaceAttack: target index out of range");
  }
  if (opt_.T1 < 1 || opt_.T1 >= opt_.T) {
    throw ConfigError("TwoStageNullSpaceAttack: need 0 < T1 < T");
  }
  const auto init = attackability::solve_theta0(arms_, target_index_,
                                                opt_.solver_max_iter);
  theta0_ = init.theta0;
  epsilon0_star_ = init.epsilon0_star;
  theta_tilde_ = linalg::Vec::Zero(static_cast<int>(arms_.front().size()));
  if (epsilon0_star_ <= 0.0) {
    phase_ = Phase::Aborted;
    abort_reason_ = "initial attackability test failed (epsilon0 <= 0)";
  }
}

void TwoStageNullSpaceAttack::boundary_test() {
  if (n_target_ == 0) {
    // adversary state corrupt: the estimate is undefined without a single
    // target observation, so the assertion degrades to "not attackable"
    phase_ = Phase::Aborted;
    abort_reason_ = "no target-arm observations in stage 1";
    return;
  }
  const linalg::Vec& xt = arms_[target_index_];
  const double scale =
      sum_target_rewards_ / (static_cast<double>(n_target_) * xt.squaredNorm());
  attackability::ProjectedParam proj;
  proj.theta_parallel = scale * xt;
  proj.target_mean = xt.dot(proj.theta_parallel);

  attackability::SubgradientOptions sopts;
  sopts.max_iter = opt_.solver_max_iter;
  try {
    const auto report =
        attackability::attackability_index(arms_, target_index_, proj, sopts);
    epsilon_tilde_star_ = report.epsilon_star;
    if (report.epsilon_star <= 0.0) {
      phase_ = Phase::Aborted;
      abort_reason_ = "attackability test failed (estimated index <= 0)";
      return;
    }
    theta_tilde_ = proj.theta_parallel + report.certificate;
    phase_ = Phase::Stage2;
  } catch (const InfeasibleNorm&) {
    epsilon_tilde_star_ = -std::numeric_limits<double>::infinity();
    phase_ = Phase::Aborted;
    abort_reason_ = "estimated parallel component outside the unit ball";
  }
}

double TwoStageNullSpaceAttack::intercept(long round, int arm_index,
                                          double true_reward,
                                          env::RngStream& attack_stream,
                                          AttackLedger& ledger) {
  const bool is_target = arm_index == target_index_;

  if (phase_ == Phase::Aborted) {
    ledger.record(round, arm_index, is_target, true_reward, true_reward, 0);
    return true_reward;
  }

  if (phase_ == Phase::Stage1) {
    // every arm, target included, gets a theta0-generated reward
    const double fed = arms_.at(arm_index).dot(theta0_) +
                       attack_stream.normal(0.0, opt_.attack_noise_sigma);
    if (is_target) {
      ++n_target_;
      sum_target_rewards_ += true_reward;  // the adversary sees true rewards
    }
    ledger.record(round, arm_index, is_target, true_reward, fed, 1);
    if (round >= opt_.T1) boundary_test();
    return fed;
  }

  // Stage 2
  double fed = true_reward;
  if (!is_target) {
    fed = arms_.at(arm_index).dot(theta_tilde_) +
          attack_stream.normal(0.0, opt_.attack_noise_sigma);
  } else if (!compensation_done_) {
    if (opt_.compensate) {
      const linalg::Vec& xt = arms_[target_index_];
      fed = compensation_reward(n_target_, xt.dot(theta_tilde_), xt.dot(theta0_),
                                attack_stream.normal(0.0, opt_.attack_noise_sigma));
    }
    compensation_done_ = true;
  }
  ledger.record(round, arm_index, is_target, true_reward, fed, 2);
  return fed;
}

}  // namespace banditlab::attacks
