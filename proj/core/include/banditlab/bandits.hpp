#pragma once

#include <vector>

#include "banditlab/linalg.hpp"

namespace banditlab::bandits {

struct ArmChoice {
  int arm_index = 0;
  std::vector<double> ucb_scores;  // LinUCB only, for logging
};

/// Default ridge coefficient keeping the estimate inside the unit ball on
/// unit-scale data. No constructive rule pins it down, so callers get the
/// conventional value plus a runtime norm monitor on the learner itself.
double linucb_lambda_for_unit_ball(double data_scale_hint = 1.0);

/// LinUCB with ridge regression. The confidence multiplier is
///   alpha_t = noise_scale * sqrt(d * log((1 + t/lambda)/delta)) + sqrt(lambda),
/// the self-normalized bound with noise_scale the reward noise level
/// (noise_scale = 1 gives the unit-scale form used in the width analysis).
class LinUcb {
 public:
  struct Options {
    double lambda = 1.0;
    double delta = 0.01;
    double noise_scale = 1.0;
  };

  LinUcb(int dim, Options opt);

  /// Argmax of x' theta_hat + alpha_t ||x||_{A^-1}; ties go to the lowest
  /// index. Scores for all arms come back for logging.
  ArmChoice choose(const std::vector<linalg::Vec>& arms) const;

  /// A += x x', b += reward x, re-solve the ridge estimate, advance t.
  void update(const linalg::Vec& arm, double reward);

  double confidence_bound(const linalg::Vec& arm) const;

  const linalg::Mat& design_matrix() const { return A_; }
  const linalg::Vec& response() const { return b_; }
  const linalg::Vec& theta_hat() const { return theta_hat_; }
  double alpha() const { return alpha_; }
  long t() const { return t_; }
  double lambda() const { return opt_.lambda; }

  /// Rounds where ||theta_hat|| >= 1 so far (the unit-ball monitor).
  long norm_violations() const { return norm_violations_; }

 private:
  void refresh_alpha();

  Options opt_;
  int dim_;
  linalg::Mat A_;
  linalg::Vec b_;
  linalg::Vec theta_hat_;
  Eigen::LLT<linalg::Mat> llt_;
  double alpha_ = 0.0;
  long t_ = 0;
  long norm_violations_ = 0;
};

/// Kiefer-Wolfowitz optimal design weights by Frank-Wolfe on the log-det
/// objective, run in an orthonormal basis of the arms' span. Terminates when
/// max_a ||x_a||^2_{V(pi)^-1} <= (1 + tol) * dim(span).
std::vector<double> g_optimal_design(const std::vector<linalg::Vec>& arms,
                                     double tol = 0.01);

/// Largest-remainder rounding of pi * total; counts sum to total exactly.
std::vector<long> round_design_counts(const std::vector<double>& pi, long total);

/// Survivors after one elimination sweep: arm a goes when some arm b has
/// (x_b - x_a)' theta_hat > 2 * width. The empirical best stays by
/// construction, so the result is never empty.
std::vector<int> eliminate_arms(const std::vector<linalg::Vec>& arms,
                                const std::vector<int>& active,
                                const linalg::Vec& theta_hat, double width);

/// Phased elimination with corruption-robust confidence widths.
/// Schedule and widths:
///   m_l = m0_factor * d * 2^l,
///   W_l = noise_scale * sqrt(2 d log(k l (l+1) / delta) / m_l) + S_l / m_l
/// with S_l = sqrt(m_l), the unknown-corruption allowance (tolerates o(sqrt T)
/// total corruption). Within a phase, arms play in round-robin order of the
/// rounded design counts; eliminated arms never re-enter.
class RobustPhaseElimination {
 public:
  struct Options {
    double delta = 0.01;
    double noise_scale = 1.0;
    // m0 = m0_factor * d. The first phase has to be long enough for its own
    // width to sit below the unit reward scale, or the early phases cannot
    // eliminate anything and are spent for nothing.
    int m0_factor = 48;
    double design_tol = 0.01;
  };

  RobustPhaseElimination(std::vector<linalg::Vec> arms, Options opt);

  ArmChoice choose() const;
  void update(int arm_index, double reward);

  int phase_index() const { return phase_; }
  long phase_length() const { return phase_len_; }
  double width() const { return width_; }
  const std::vector<int>& active_arms() const { return active_; }
  const std::vector<double>& design_weights() const { return weights_; }
  const std::vector<long>& planned_counts() const { return planned_; }
  const linalg::Vec& phase_estimate() const { return phase_estimate_; }

 private:
  void start_phase();
  void end_phase();

  std::vector<linalg::Vec> arms_;
  Options opt_;
  int phase_ = 0;
  long phase_len_ = 0;
  long played_ = 0;
  double width_ = 0.0;
  std::vector<int> active_;
  std::vector<double> weights_;   // over active_, same order
  std::vector<long> planned_;    // over active_, same order
  std::vector<long> remaining_;  // over active_, same order
  int cursor_ = 0;               // round-robin position in active_
  linalg::Mat sum_xx_;
  linalg::Vec sum_xr_;
  linalg::Vec phase_estimate_;
};

}  // namespace banditlab::bandits
