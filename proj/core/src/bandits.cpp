#include "banditlab/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "banditlab/errors.hpp"

namespace banditlab::bandits {

double linucb_lambda_for_unit_ball(double /*data_scale_hint*/) { return 1.0; }

LinUcb::LinUcb(int dim, Options opt) : opt_(opt), dim_(dim) {
  if (dim < 1) throw ConfigError("LinUcb: dimension must be >= 1");
  if (opt.lambda <= 0.0) throw ConfigError("LinUcb: lambda must be > 0");
  if (opt.delta <= 0.0 || opt.delta >= 1.0) {
    throw ConfigError("LinUcb: delta must lie in (0, 1)");
  }
  A_ = opt.lambda * linalg::Mat::Identity(dim, dim);
  b_ = linalg::Vec::Zero(dim);
  theta_hat_ = linalg::Vec::Zero(dim);
  llt_.compute(A_);
  refresh_alpha();
}

void LinUcb::refresh_alpha() {
  const double t = static_cast<double>(t_);
  alpha_ = opt_.noise_scale *
               std::sqrt(dim_ * std::log((1.0 + t / opt_.lambda) / opt_.delta)) +
           std::sqrt(opt_.lambda);
}

double LinUcb::confidence_bound(const linalg::Vec& arm) const {
  return alpha_ * std::sqrt(std::max(0.0, arm.dot(llt_.solve(arm))));
}

ArmChoice LinUcb::choose(const std::vector<linalg::Vec>& arms) const {
  ArmChoice choice;
  choice.ucb_scores.reserve(arms.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const double score = arms[a].dot(theta_hat_) + confidence_bound(arms[a]);
    choice.ucb_scores.push_back(score);
    if (score > best) {
      best = score;
      choice.arm_index = static_cast<int>(a);
    }
  }
  return choice;
}

void LinUcb::update(const linalg::Vec& arm, double reward) {
  A_ += arm * arm.transpose();
  b_ += reward * arm;
  ++t_;
  llt_.compute(A_);
  theta_hat_ = llt_.solve(b_);
  theta_hat_ += llt_.solve(b_ - A_ * theta_hat_);
  refresh_alpha();
  if (theta_hat_.norm() >= 1.0) ++norm_violations_;
}

std::vector<double> g_optimal_design(const std::vector<linalg::Vec>& arms,
                                     double tol) {
  const int k = static_cast<int>(arms.size());
  if (k == 0) throw ConfigError("g_optimal_design: empty arm set");
  if (k == 1) return {1.0};

  const int d = static_cast<int>(arms.front().size());
  linalg::Mat stacked(d, k);
  for (int a = 0; a < k; ++a) stacked.col(a) = arms[a];

  // Work inside the span so V(pi) stays invertible.
  Eigen::ColPivHouseholderQR<linalg::Mat> qr(stacked);
  qr.setThreshold(1e-10);
  const int r = std::max<int>(1, static_cast<int>(qr.rank()));
  const linalg::Mat Q = qr.householderQ() * linalg::Mat::Identity(d, r);
  linalg::Mat Y = Q.transpose() * stacked;  // r x k, reduced coordinates

  std::vector<double> pi(k, 1.0 / k);
  const long max_iter = 100000;
  for (long it = 0; it < max_iter; ++it) {
    linalg::Mat V = linalg::Mat::Zero(r, r);
    for (int a = 0; a < k; ++a) {
      if (pi[a] > 0.0) V += pi[a] * Y.col(a) * Y.col(a).transpose();
    }
    V += 1e-12 * linalg::Mat::Identity(r, r);
    Eigen::LLT<linalg::Mat> llt(V);
    double lev_max = 0.0;
    int amax = 0;
    for (int a = 0; a < k; ++a) {
      const double lev = Y.col(a).dot(llt.solve(Y.col(a)));
      if (lev > lev_max) {
        lev_max = lev;
        amax = a;
      }
    }
    if (lev_max <= (1.0 + tol) * r) break;
    const double gamma = (lev_max / r - 1.0) / (lev_max - 1.0);
    for (auto& w : pi) w *= 1.0 - gamma;
    pi[amax] += gamma;
  }
  return pi;
}

std::vector<long> round_design_counts(const std::vector<double>& pi, long total) {
  const int k = static_cast<int>(pi.size());
  std::vector<long> counts(k, 0);
  std::vector<std::pair<double, int>> remainders;
  remainders.reserve(k);
  long assigned = 0;
  for (int a = 0; a < k; ++a) {
    const double quota = pi[a] * static_cast<double>(total);
    counts[a] = static_cast<long>(std::floor(quota));
    assigned += counts[a];
    remainders.emplace_back(quota - std::floor(quota), a);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (long i = 0; i < total - assigned; ++i) {
    ++counts[remainders[static_cast<std::size_t>(i) % remainders.size()].second];
  }
  return counts;
}

std::vector<int> eliminate_arms(const std::vector<linalg::Vec>& arms,
                                const std::vector<int>& active,
                                const linalg::Vec& theta_hat, double width) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a : active) best = std::max(best, arms[a].dot(theta_hat));
  std::vector<int> survivors;
  for (int a : active) {
    const double gap = best - arms[a].dot(theta_hat);
    if (gap <= 2.0 * width) survivors.push_back(a);
  }
  return survivors;
}

RobustPhaseElimination::RobustPhaseElimination(std::vector<linalg::Vec> arms,
                                               Options opt)
    : arms_(std::move(arms)), opt_(opt) {
  if (arms_.empty()) throw ConfigError("RobustPhaseElimination: empty arm set");
  active_.resize(arms_.size());
  std::iota(active_.begin(), active_.end(), 0);
  phase_ = 0;
  start_phase();
}

void RobustPhaseElimination::start_phase() {
  ++phase_;
  const int d = static_cast<int>(arms_.front().size());
  const int k = static_cast<int>(arms_.size());
  phase_len_ = static_cast<long>(opt_.m0_factor) * d * (1L << phase_);
  played_ = 0;
  cursor_ = 0;

  std::vector<linalg::Vec> active_vecs;
  active_vecs.reserve(active_.size());
  for (int a : active_) active_vecs.push_back(arms_[a]);
  weights_ = g_optimal_design(active_vecs, opt_.design_tol);
  planned_ = round_design_counts(weights_, phase_len_);
  remaining_ = planned_;

  const double l = static_cast<double>(phase_);
  const double m = static_cast<double>(phase_len_);
  width_ = opt_.noise_scale *
               std::sqrt(2.0 * d * std::log(k * l * (l + 1.0) / opt_.delta) / m) +
           std::sqrt(m) / m;

  sum_xx_ = linalg::Mat::Zero(d, d);
  sum_xr_ = linalg::Vec::Zero(d);
  if (phase_estimate_.size() == 0) phase_estimate_ = linalg::Vec::Zero(d);
}

ArmChoice RobustPhaseElimination::choose() const {
  ArmChoice choice;
  if (active_.size() == 1) {
    choice.arm_index = active_.front();
    return choice;
  }
  // next planned arm in round-robin order, starting at the cursor
  const int n = static_cast<int>(active_.size());
  for (int step = 0; step < n; ++step) {
    const int i = (cursor_ + step) % n;
    if (remaining_[i] > 0) {
      choice.arm_index = active_[i];
      return choice;
    }
  }
  choice.arm_index = active_.front();  // plan exhausted mid-phase; harmless
  return choice;
}

void RobustPhaseElimination::update(int arm_index, double reward) {
  const linalg::Vec& x = arms_.at(arm_index);
  sum_xx_ += x * x.transpose();
  sum_xr_ += reward * x;
  ++played_;

  if (active_.size() > 1) {
    const int n = static_cast<int>(active_.size());
    for (int step = 0; step < n; ++step) {
      const int i = (cursor_ + step) % n;
      if (active_[i] == arm_index && remaining_[i] > 0) {
        --remaining_[i];
        cursor_ = (i + 1) % n;
        break;
      }
    }
  }
  if (played_ >= phase_len_) end_phase();
}

void RobustPhaseElimination::end_phase() {
  const int d = static_cast<int>(arms_.front().size());
  // Least squares on the phase data, solved on the span of the pulled arms.
  Eigen::SelfAdjointEigenSolver<linalg::Mat> eig(sum_xx_);
  linalg::Vec theta = linalg::Vec::Zero(d);
  const double cutoff = 1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff());
  for (int i = 0; i < d; ++i) {
    if (eig.eigenvalues()(i) > cutoff) {
      const linalg::Vec& u = eig.eigenvectors().col(i);
      theta += (u.dot(sum_xr_) / eig.eigenvalues()(i)) * u;
    }
  }
  phase_estimate_ = theta;
  active_ = eliminate_arms(arms_, active_, phase_estimate_, width_);
  start_phase();
}

}  // namespace banditlab::bandits
