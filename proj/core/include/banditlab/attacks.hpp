#pragma once

#include <optional>
#include <string>
#include <vector>

#include "banditlab/attackability.hpp"
#include "banditlab/env.hpp"
#include "banditlab/linalg.hpp"

namespace banditlab::attacks {

struct LedgerEntry {
  long round = 0;
  int arm_index = 0;
  bool is_target = false;
  double true_reward = 0.0;
  double fed_reward = 0.0;
  double delta = 0.0;  // fed - true
  double cum_cost = 0.0;
  long cum_target_pulls = 0;
  int phase = 0;  // 0 passthrough, 1 stage one, 2 attack stage
};

/// Per-round record of every manipulation plus the running totals the
/// robustness bounds are stated in: C(t), the non-target corruption S'_t,
/// and the largest single corruption seen on the target arm.
class AttackLedger {
 public:
  void record(long round, int arm_index, bool is_target, double true_reward,
              double fed_reward, int phase);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double total_cost() const { return cum_cost_; }
  double nontarget_cost() const { return s_prime_; }
  double max_target_corruption() const { return gamma_realized_; }
  long target_pulls() const { return target_pulls_; }

  /// Sum of |delta| over rounds in (t0, t1].
  double cost_between(long t0, long t1) const;

 private:
  std::vector<LedgerEntry> entries_;
  double cum_cost_ = 0.0;
  double s_prime_ = 0.0;
  double gamma_realized_ = 0.0;
  long target_pulls_ = 0;
};

/// Reward interceptor that knows the true parameter: feeds non-target arms
/// rewards generated by theta_tilde = theta_parallel + certificate and never
/// touches the target arm.
class OracleNullSpaceAttack {
 public:
  OracleNullSpaceAttack(const env::EnvironmentSpec& env,
                        const attackability::AttackabilityReport& report,
                        double attack_noise_sigma);

  double intercept(long round, int arm_index, double true_reward,
                   env::RngStream& attack_stream, AttackLedger& ledger);

  const linalg::Vec& theta_tilde() const { return theta_tilde_; }

 private:
  linalg::Vec theta_tilde_;
  std::vector<linalg::Vec> arms_;
  int target_index_;
  double sigma_;
};

/// Stage-2 compensation for the target arm's first pull: realigns the
/// stage-1 target observations from theta0 to theta_tilde in one shot.
double compensation_reward(long n_target, double target_dot_tilde,
                           double target_dot_theta0, double attack_noise);

/// Hoeffding radius sqrt(2 R^2 log(1/delta) / n) for the parallel-component
/// estimate from n target-arm observations.
double estimate_error_bound(long n, double R, double delta);

/// Reward interceptor without knowledge of the true parameter. Stage 1
/// imitates a theta0-environment on every arm while harvesting the target
/// arm's true rewards; at the boundary it estimates the parallel component,
/// re-runs the certificate program with the estimate, and either aborts or
/// switches to the oracle-style attack with theta_tilde.
///
/// The constructor takes only the arm set and target index: the adversary
/// never sees theta_star.
class TwoStageNullSpaceAttack {
 public:
  enum class Phase { Stage1, Stage2, Aborted };

  struct Options {
    long T = 10000;
    long T1 = 100;
    double attack_noise_sigma = 0.1;
    bool compensate = true;  // line up stage-1 target rewards with theta_tilde
    double delta = 0.01;
    long solver_max_iter = 200000;
  };

  TwoStageNullSpaceAttack(std::vector<linalg::Vec> arms, int target_index,
                          Options opt);

  double intercept(long round, int arm_index, double true_reward,
                   env::RngStream& attack_stream, AttackLedger& ledger);

  Phase phase() const { return phase_; }
  const std::string& abort_reason() const { return abort_reason_; }
  double epsilon0_star() const { return epsilon0_star_; }
  std::optional<double> epsilon_tilde_star() const { return epsilon_tilde_star_; }
  const linalg::Vec& theta0() const { return theta0_; }
  const linalg::Vec& theta_tilde() const { return theta_tilde_; }
  long n_target_stage1() const { return n_target_; }
  bool asserted_attackable() const { return phase_ == Phase::Stage2; }

 private:
  void boundary_test();

  std::vector<linalg::Vec> arms_;
  int target_index_;
  Options opt_;
  Phase phase_ = Phase::Stage1;
  std::string abort_reason_;
  linalg::Vec theta0_;
  double epsilon0_star_ = 0.0;
  long n_target_ = 0;
  double sum_target_rewards_ = 0.0;
  std::optional<double> epsilon_tilde_star_;
  linalg::Vec theta_tilde_;
  bool compensation_done_ = false;
};

}  // namespace banditlab::attacks
