#include "banditlab/attackability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banditlab/errors.hpp"

namespace banditlab::attackability {

namespace {

constexpr double kNormSlack = 1e-9;

/// Objective f(z) = min_a (offset_a - slope_a' z) and the active arm
/// (lowest index on ties).
std::pair<double, int> evaluate(const MaxMinBallProblem& p, const linalg::Vec& z) {
  double best = std::numeric_limits<double>::infinity();
  int active = 0;
  for (std::size_t a = 0; a < p.offsets.size(); ++a) {
    const double v = p.offsets[a] - p.slopes[a].dot(z);
    if (v < best) {
      best = v;
      active = static_cast<int>(a);
    }
  }
  return {best, active};
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::exact_1d ? "exact_1d" : "subgradient";
}

ProjectedParam project_parallel(const std::vector<linalg::Vec>& arms,
                                int target_index, const linalg::Vec& theta) {
  if (target_index < 0 || target_index >= static_cast<int>(arms.size())) {
    throw IndexOutOfRange("project_parallel: target index out of range");
  }
  const linalg::Vec& xt = arms[target_index];
  const double nsq = xt.squaredNorm();
  if (nsq == 0.0) {
    throw ZeroTarget("project_parallel: target arm is the zero vector");
  }
  ProjectedParam proj;
  proj.theta_parallel = (xt.dot(theta) / nsq) * xt;
  proj.target_mean = xt.dot(proj.theta_parallel);
  return proj;
}

ProjectedParam project_parallel(const env::EnvironmentSpec& env,
                                const linalg::Vec& theta) {
  return project_parallel(env.arms, env.target_index, theta);
}

MaxMinBallProblem reduce_to_ball(const std::vector<linalg::Vec>& arms,
                                 int target_index, const ProjectedParam& proj,
                                 const linalg::Mat& basis) {
  const double pn = proj.theta_parallel.norm();
  if (pn > 1.0 + kNormSlack) {
    throw InfeasibleNorm("reduce_to_ball: ||theta_parallel|| = " +
                         std::to_string(pn) + " exceeds the unit budget");
  }
  MaxMinBallProblem p;
  p.radius = std::sqrt(std::max(0.0, 1.0 - pn * pn));
  const double target_mean = proj.target_mean;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    if (a == target_index) continue;
    p.offsets.push_back(target_mean - arms[a].dot(proj.theta_parallel));
    p.slopes.push_back(basis.transpose() * arms[a]);
  }
  return p;
}

SolveResult solve_exact_1d(const MaxMinBallProblem& p) {
  if (!p.slopes.empty() && p.slopes.front().size() != 1) {
    throw WrongDimension("solve_exact_1d: reduced dimension is " +
                         std::to_string(p.slopes.front().size()) + ", need 1");
  }
  const double r = p.radius;
  std::vector<double> candidates = {0.0};
  if (r > 0.0) {
    candidates.push_back(-r);
    candidates.push_back(r);
    const std::size_t k = p.slopes.size();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const double ds = p.slopes[i](0) - p.slopes[j](0);
        if (std::abs(ds) < 1e-300) continue;
        const double z = (p.offsets[i] - p.offsets[j]) / ds;
        if (std::abs(z) <= r) candidates.push_back(z);
      }
    }
  }

  SolveResult res;
  res.iterations = static_cast<long>(candidates.size());
  res.gap_bound = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  double best_z = 0.0;
  linalg::Vec zvec(1);
  for (const double z : candidates) {
    zvec(0) = z;
    const double f = evaluate(p, zvec).first;
    if (f > best || (f == best && std::abs(z) < std::abs(best_z))) {
      best = f;
      best_z = z;
    }
  }
  res.epsilon_star = best;
  res.z_star = linalg::Vec(1);
  res.z_star(0) = best_z;
  return res;
}

SolveResult solve_subgradient(const MaxMinBallProblem& p, long max_iter,
                              double /*tol*/) {
  const int n = p.slopes.empty() ? 0 : static_cast<int>(p.slopes.front().size());
  const std::size_t k = p.slopes.size();

  double min_offset = std::numeric_limits<double>::infinity();
  for (const double b : p.offsets) min_offset = std::min(min_offset, b);

  double max_slope = 0.0;
  for (const auto& s : p.slopes) max_slope = std::max(max_slope, s.norm());

  SolveResult res;
  res.z_star = linalg::Vec::Zero(n);
  if (p.radius <= 0.0 || max_slope == 0.0 || k == 0) {
    res.epsilon_star = min_offset;
    res.iterations = 0;
    res.gap_bound = 0.0;
    return res;
  }

  // Stack the slopes for vectorized objective evaluation.
  Eigen::MatrixXd S(k, n);
  Eigen::VectorXd b(k);
  for (std::size_t a = 0; a < k; ++a) {
    S.row(a) = p.slopes[a].transpose();
    b(a) = p.offsets[a];
  }
  auto eval = [&](const linalg::Vec& z, int* active) {
    Eigen::VectorXd vals = b - S * z;
    int idx = 0;
    const double f = vals.minCoeff(&idx);  // Eigen keeps the first minimizer
    if (active) *active = idx;
    return f;
  };

  const double r = p.radius;
  const double c = r / max_slope;
  linalg::Vec z = linalg::Vec::Zero(n);
  linalg::Vec zsum = linalg::Vec::Zero(n);
  linalg::Vec avg(n);

  int active = 0;
  double best = eval(z, &active);
  linalg::Vec best_z = z;

  for (long t = 1; t <= max_iter; ++t) {
    const double f = eval(z, &active);
    if (f > best) {
      best = f;
      best_z = z;
    }
    z -= (c / std::sqrt(static_cast<double>(t))) * S.row(active).transpose();
    const double zn = z.norm();
    if (zn > r) z *= r / zn;
    zsum += z;
    if ((t & 63) == 0) {
      avg = zsum / static_cast<double>(t);
      const double fa = eval(avg, nullptr);
      if (fa > best) {
        best = fa;
        best_z = avg;
      }
    }
  }
  avg = zsum / static_cast<double>(max_iter);
  const double fa = eval(avg, nullptr);
  if (fa > best) {
    best = fa;
    best_z = avg;
  }

  res.epsilon_star = best;
  res.z_star = best_z;
  res.iterations = max_iter;
  res.gap_bound = max_slope * r / std::sqrt(static_cast<double>(max_iter));
  return res;
}

namespace {

/// The report must certify itself: the certificate is orthogonal to the
/// target, inside the norm budget, and achieves the reported index on every
/// non-target arm. Violations indicate a solver bug, not bad input.
void check_report(const std::vector<linalg::Vec>& arms, int target_index,
                  const ProjectedParam& proj, const AttackabilityReport& rep) {
  const linalg::Vec& xt = arms[target_index];
  if (std::abs(xt.dot(rep.certificate)) > 1e-8) {
    throw Error("attackability_index: certificate not orthogonal to target");
  }
  if ((proj.theta_parallel + rep.certificate).norm() > 1.0 + 1e-8) {
    throw Error("attackability_index: certificate breaks the norm budget");
  }
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    if (a == target_index) continue;
    const double lhs = proj.target_mean;
    const double rhs =
        rep.epsilon_star + arms[a].dot(proj.theta_parallel + rep.certificate);
    if (lhs < rhs - 1e-7) {
      throw Error("attackability_index: reported index infeasible on arm " +
                  std::to_string(a));
    }
  }
}

}  // namespace

AttackabilityReport attackability_index(const std::vector<linalg::Vec>& arms,
                                        int target_index,
                                        const ProjectedParam& proj,
                                        const SubgradientOptions& opts) {
  const linalg::Mat basis = linalg::nullspace_basis(arms.at(target_index));
  const MaxMinBallProblem p = reduce_to_ball(arms, target_index, proj, basis);

  AttackabilityReport rep;
  SolveResult sol;
  if (basis.cols() == 1) {
    sol = solve_exact_1d(p);
    rep.method = Method::exact_1d;
  } else {
    sol = solve_subgradient(p, opts.max_iter, opts.tol);
    rep.method = Method::subgradient;
  }
  rep.epsilon_star = sol.epsilon_star;
  rep.certificate = basis * sol.z_star;
  rep.attackable = sol.epsilon_star > 0.0;
  rep.iterations = sol.iterations;
  rep.duality_gap_bound = sol.gap_bound;
  check_report(arms, target_index, proj, rep);
  return rep;
}

AttackabilityReport attackability_index(const env::EnvironmentSpec& env,
                                        const ProjectedParam& proj,
                                        const SubgradientOptions& opts) {
  return attackability_index(env.arms, env.target_index, proj, opts);
}

Theta0Result solve_theta0(const std::vector<linalg::Vec>& arms, int target_index,
                          long max_iter) {
  if (arms.size() < 2) {
    throw ConfigError("solve_theta0: need at least two arms");
  }
  if (target_index < 0 || target_index >= static_cast<int>(arms.size())) {
    throw IndexOutOfRange("solve_theta0: target index out of range");
  }
  const linalg::Vec& xt = arms[target_index];
  MaxMinBallProblem p;
  p.radius = 1.0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    if (a == target_index) continue;
    p.offsets.push_back(0.0);
    p.slopes.push_back(arms[a] - xt);  // objective term (x~ - x_a)' theta
  }
  const SolveResult sol = solve_subgradient(p, max_iter);
  Theta0Result res;
  res.theta0 = sol.z_star;
  res.epsilon0_star = sol.epsilon_star;
  res.iterations = sol.iterations;
  return res;
}

}  // namespace banditlab::attackability

namespace banditlab::env {

// Declared in env.hpp; lives here because acceptance is the certificate.
SampledEnvironment sample_attackable_environment(int d, int k, double sigma,
                                                 RngStreams& rng, int max_tries,
                                                 EnvGenerator generator,
                                                 double min_index) {
  if (max_tries < 1) {
    throw ConfigError("sample_attackable_environment: max_tries must be >= 1");
  }
  if (!generator) generator = &sample_environment;
  for (int tries = 1; tries <= max_tries; ++tries) {
    EnvironmentSpec env = generator(d, k, sigma, rng);
    const auto proj =
        attackability::project_parallel(env, env.theta_star);
    const auto report = attackability::attackability_index(env, proj);
    if (report.attackable && report.epsilon_star >= min_index) {
      return {std::move(env), tries};
    }
  }
  throw ExhaustedTries("sample_attackable_environment: no attackable instance in " +
                       std::to_string(max_tries) + " tries");
}

}  // namespace banditlab::env
