#pragma once

#include <string>
#include <vector>

#include "banditlab/env.hpp"
#include "banditlab/linalg.hpp"

namespace banditlab::attackability {

/// Component of a parameter vector along the target arm's direction.
/// target_mean is the target arm's expected reward under that component.
struct ProjectedParam {
  linalg::Vec theta_parallel;
  double target_mean = 0.0;
};

/// The certificate program after the null-space change of variables
/// theta_perp = B z: maximize over ||z|| <= radius the smallest of
/// offset_a - slope_a' z across non-target arms.
struct MaxMinBallProblem {
  std::vector<linalg::Vec> slopes;
  std::vector<double> offsets;
  double radius = 0.0;
};

struct SolveResult {
  double epsilon_star = 0.0;
  linalg::Vec z_star;
  long iterations = 0;
  double gap_bound = 0.0;  // worst-case distance to the true optimum
};

enum class Method { exact_1d, subgradient };

std::string to_string(Method m);

struct AttackabilityReport {
  double epsilon_star = 0.0;
  linalg::Vec certificate;  // perturbation direction orthogonal to the target
  bool attackable = false;  // strictly positive index
  long iterations = 0;
  double duality_gap_bound = 0.0;
  Method method = Method::subgradient;
};

struct SubgradientOptions {
  long max_iter = 200000;
  double tol = 0.0;  // advisory only; the solver runs a fixed budget
};

/// theta_parallel = (x~' theta / ||x~||^2) x~. Throws ZeroTarget.
ProjectedParam project_parallel(const env::EnvironmentSpec& env,
                                const linalg::Vec& theta);
ProjectedParam project_parallel(const std::vector<linalg::Vec>& arms,
                                int target_index, const linalg::Vec& theta);

/// Change of variables into the null space of the target arm. The norm
/// budget ||theta_parallel + B z|| <= 1 becomes ||z|| <= radius with
/// radius = sqrt(max(0, 1 - ||theta_parallel||^2)). Throws InfeasibleNorm
/// when ||theta_parallel|| > 1 + 1e-9.
MaxMinBallProblem reduce_to_ball(const std::vector<linalg::Vec>& arms,
                                 int target_index, const ProjectedParam& proj,
                                 const linalg::Mat& basis);

/// Exact solver for a one-dimensional reduced problem: evaluates the concave
/// piecewise-linear objective at 0, +-radius, and every pairwise line
/// intersection inside the interval. Ties break toward smaller |z|.
SolveResult solve_exact_1d(const MaxMinBallProblem& p);

/// Projected subgradient ascent with diminishing steps c/sqrt(t),
/// c = radius / max_a ||slope_a|| (guarded against zero slopes). Tracks the
/// best raw iterate and the running-average iterate; the reported value is
/// the exact objective at the best point seen, so it never overstates the
/// optimum. gap_bound = G * radius / sqrt(max_iter).
SolveResult solve_subgradient(const MaxMinBallProblem& p, long max_iter,
                              double tol = 0.0);

/// Full certificate: reduces to the ball problem, solves it (exactly when
/// the null space is one-dimensional, by subgradient otherwise), and maps
/// the solution back to the ambient space. The returned report always
/// satisfies the feasibility identities of the program it solves.
AttackabilityReport attackability_index(const std::vector<linalg::Vec>& arms,
                                        int target_index,
                                        const ProjectedParam& proj,
                                        const SubgradientOptions& opts = {});
AttackabilityReport attackability_index(const env::EnvironmentSpec& env,
                                        const ProjectedParam& proj,
                                        const SubgradientOptions& opts = {});

struct Theta0Result {
  linalg::Vec theta0;
  double epsilon0_star = 0.0;
  long iterations = 0;
};

/// Stage-zero parameter: maximize min_a (x~ - x_a)' theta over the unit
/// ball, with no null-space restriction. Under the maximizer the target arm
/// beats every other arm by exactly epsilon0_star.
Theta0Result solve_theta0(const std::vector<linalg::Vec>& arms, int target_index,
                          long max_iter = 200000);

}  // namespace banditlab::attackability
