#include <doctest.h>

#include <random>

#include "banditlab/attackability.hpp"
#include "banditlab/env.hpp"

using namespace banditlab;
using attackability::MaxMinBallProblem;
using linalg::Mat;
using linalg::Vec;

namespace {

const std::filesystem::path kFixtures = BANDITLAB_FIXTURES_DIR;

Vec make_vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

/// Random instance with unit-ball arms, k in [2, kmax], for oracle sweeps.
env::EnvironmentSpec random_instance(int d, int kmax, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  env::EnvironmentSpec e;
  const int k = 2 + static_cast<int>(gen() % static_cast<unsigned>(kmax - 1));
  for (int a = 0; a < k; ++a) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x(j) = normal(gen);
    x *= (0.2 + 0.8 * unif(gen)) / x.norm();
    e.arms.push_back(x);
  }
  Vec theta(d);
  for (int j = 0; j < d; ++j) theta(j) = normal(gen);
  theta *= (0.2 + 0.8 * unif(gen)) / theta.norm();
  e.theta_star = theta;
  e.target_index = static_cast<int>(gen() % static_cast<unsigned>(k));
  return e;
}

/// Orthonormal arm set with positive means: a rotated multi-armed bandit.
env::EnvironmentSpec orthonormal_instance(int d, std::mt19937_64& gen,
                                          double scale = 1.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = normal(gen);
  const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
  env::EnvironmentSpec e;
  Vec mu(d);
  for (int j = 0; j < d; ++j) mu(j) = 0.05 + 0.95 * unif(gen);
  mu *= scale / mu.norm();
  e.theta_star = Q * mu;
  for (int a = 0; a < d; ++a) e.arms.push_back(Q.col(a));
  e.target_index = static_cast<int>(gen() % static_cast<unsigned>(d));
  return e;
}

MaxMinBallProblem reduce(const env::EnvironmentSpec& e) {
  const auto proj = attackability::project_parallel(e, e.theta_star);
  const Mat basis = linalg::nullspace_basis(e.target());
  return attackability::reduce_to_ball(e.arms, e.target_index, proj, basis);
}

}  // namespace

TEST_CASE("project_parallel matches the closed form") {
  env::EnvironmentSpec e;
  e.arms = {make_vec({0.0, 1.0}), make_vec({1.0, 2.0})};
  e.target_index = 0;
  e.theta_star = make_vec({1.0, 1.0});

  auto proj = attackability::project_parallel(e, e.theta_star);
  CHECK(proj.theta_parallel(0) == doctest::Approx(0.0));
  CHECK(proj.theta_parallel(1) == doctest::Approx(1.0));
  CHECK(proj.target_mean == doctest::Approx(1.0));

  auto proj2 = attackability::project_parallel(e, make_vec({0.0, 0.5}));
  CHECK(proj2.theta_parallel(1) == doctest::Approx(0.5));

  // component orthogonal to the target projects to zero
  auto proj3 = attackability::project_parallel(e, make_vec({3.0, 0.0}));
  CHECK(proj3.theta_parallel.norm() == doctest::Approx(0.0));
  CHECK(proj3.target_mean == doctest::Approx(0.0));
}

TEST_CASE("project_parallel rejects a zero target arm") {
  env::EnvironmentSpec e;
  e.arms = {Vec::Zero(2), make_vec({1.0, 0.0})};
  e.target_index = 0;
  e.theta_star = make_vec({1.0, 0.0});
  CHECK_THROWS_AS(attackability::project_parallel(e, e.theta_star), ZeroTarget);
}

TEST_CASE("reduce_to_ball on the three-arm unattackable example") {
  const auto e = env::load_instance(kFixtures / "example1.json", true);
  const auto p = reduce(e);
  REQUIRE(p.offsets.size() == 2);
  CHECK(p.radius == doctest::Approx(0.0));  // ||theta_parallel|| = 1
  CHECK(p.offsets[0] == doctest::Approx(-1.0));
  CHECK(p.offsets[1] == doctest::Approx(-1.0));
  // slopes are +-1 in the 1-D null space, up to a common basis sign
  const double s0 = p.slopes[0](0), s1 = p.slopes[1](0);
  CHECK(std::abs(s0) == doctest::Approx(1.0));
  CHECK(std::abs(s1) == doctest::Approx(1.0));
  CHECK(s0 * s1 == doctest::Approx(-1.0));
}

TEST_CASE("reduce_to_ball on orthonormal arms with the target as parameter") {
  env::EnvironmentSpec e;
  const int d = 4;
  for (int a = 0; a < d; ++a) {
    Vec x = Vec::Zero(d);
    x(a) = 1.0;
    e.arms.push_back(x);
  }
  e.theta_star = e.arms[0];
  e.target_index = 0;
  const auto p = reduce(e);
  CHECK(p.radius == doctest::Approx(0.0));
  for (std::size_t a = 0; a < p.offsets.size(); ++a) {
    CHECK(p.offsets[a] == doctest::Approx(1.0));
    CHECK(p.slopes[a].norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("reduce_to_ball rejects an oversized parallel component") {
  env::EnvironmentSpec e;
  e.arms = {make_vec({0.0, 1.0}), make_vec({1.0, 0.0})};
  e.target_index = 0;
  attackability::ProjectedParam proj;
  proj.theta_parallel = make_vec({0.0, 1.5});
  proj.target_mean = 1.5;
  const Mat basis = linalg::nullspace_basis(e.target());
  CHECK_THROWS_AS(
      attackability::reduce_to_ball(e.arms, e.target_index, proj, basis),
      InfeasibleNorm);
}

TEST_CASE("solve_exact_1d candidate evaluation") {
  // degenerate radius: the three-arm example collapses to min offset = -1
  const auto e = env::load_instance(kFixtures / "example1.json", true);
  const auto sol = attackability::solve_exact_1d(reduce(e));
  CHECK(sol.epsilon_star == doctest::Approx(-1.0));
  CHECK(sol.z_star(0) == doctest::Approx(0.0));

  // orthonormal two-arm with theta* on the target: gap 1 with no motion
  env::EnvironmentSpec mab;
  mab.arms = {make_vec({1.0, 0.0}), make_vec({0.0, 1.0})};
  mab.theta_star = make_vec({1.0, 0.0});
  mab.target_index = 0;
  const auto sol2 = attackability::solve_exact_1d(reduce(mab));
  CHECK(sol2.epsilon_star == doctest::Approx(1.0));

  MaxMinBallProblem wrong;
  wrong.radius = 1.0;
  wrong.slopes = {make_vec({1.0, 2.0})};
  wrong.offsets = {0.0};
  CHECK_THROWS_AS(attackability::solve_exact_1d(wrong), WrongDimension);
}

TEST_CASE("subgradient handles slope-free and radius-zero problems") {
  MaxMinBallProblem p;
  p.radius = 1.0;
  p.offsets = {5.0, 5.0};
  p.slopes = {Vec::Zero(3), Vec::Zero(3)};
  const auto sol = attackability::solve_subgradient(p, 1000);
  CHECK(sol.epsilon_star == doctest::Approx(5.0));
  CHECK(sol.z_star.norm() == doctest::Approx(0.0));
}

TEST_CASE("subgradient agrees with the exact 1-D oracle") {
  std::mt19937_64 gen(31337);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto e = random_instance(2, 6, gen);
    const auto p = reduce(e);
    const auto exact = attackability::solve_exact_1d(p);
    const auto sub = attackability::solve_subgradient(p, 1000000);
    worst = std::max(worst, std::abs(exact.epsilon_star - sub.epsilon_star));
    // the subgradient value is an exact evaluation at a feasible point, so
    // it can never exceed the true optimum
    CHECK(sub.epsilon_star <= exact.epsilon_star + 1e-12);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("attackability_index on the paper fixtures") {
  const auto ex1 = env::load_instance(kFixtures / "example1.json", true);
  const auto rep = attackability::attackability_index(
      ex1, attackability::project_parallel(ex1, ex1.theta_star));
  CHECK_FALSE(rep.attackable);
  CHECK(rep.epsilon_star == doctest::Approx(-1.0));
  CHECK(rep.method == attackability::Method::exact_1d);
}

TEST_CASE("rescaling the two-arm example makes it attackable") {
  auto e = env::load_instance(kFixtures / "example1_two_arm.json", true);
  const auto raw = attackability::attackability_index(
      e, attackability::project_parallel(e, e.theta_star));
  CHECK_FALSE(raw.attackable);  // radius 0 at raw scale
  CHECK(raw.epsilon_star == doctest::Approx(-1.0));

  for (auto& x : e.arms) x /= 10.0;
  e.theta_star /= 10.0;
  const auto scaled = attackability::attackability_index(
      e, attackability::project_parallel(e, e.theta_star));
  CHECK(scaled.attackable);
  CHECK(scaled.epsilon_star > 0.0);
}

TEST_CASE("orthonormal instances are attackable for every target") {
  std::mt19937_64 gen(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(gen() % 5);
    auto e = orthonormal_instance(d, gen);
    for (int target = 0; target < d; ++target) {
      e.target_index = target;
      const auto rep = attackability::attackability_index(
          e, attackability::project_parallel(e, e.theta_star),
          {.max_iter = 20000});
      CHECK(rep.attackable);
      CHECK(rep.epsilon_star > 0.0);
    }
  }
}

TEST_CASE("attackability survives shrinking the parameter on orthonormal sets") {
  std::mt19937_64 gen(555);
  auto base = orthonormal_instance(5, gen);
  for (double c : {1.0, 0.7, 0.4, 0.1, 0.01}) {
    env::EnvironmentSpec e = base;
    e.theta_star *= c;
    const auto rep = attackability::attackability_index(
        e, attackability::project_parallel(e, e.theta_star),
        {.max_iter = 20000});
    CHECK(rep.attackable);
  }
}

TEST_CASE("removing a non-target arm never decreases the index") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 200; ++trial) {
    const auto e = random_instance(2, 6, gen);
    if (e.num_arms() < 3) continue;
    const auto full = attackability::solve_exact_1d(reduce(e));
    env::EnvironmentSpec pruned = e;
    int drop = static_cast<int>(gen() % static_cast<unsigned>(e.num_arms()));
    if (drop == e.target_index) drop = (drop + 1) % e.num_arms();
    pruned.arms.erase(pruned.arms.begin() + drop);
    if (drop < pruned.target_index) --pruned.target_index;
    const auto sub = attackability::solve_exact_1d(reduce(pruned));
    CHECK(sub.epsilon_star >= full.epsilon_star - 1e-12);
  }
}

TEST_CASE("certificates are feasible for every solver output") {
  std::mt19937_64 gen(808);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(gen() % 5);
    const auto e = random_instance(d, 6, gen);
    const auto proj = attackability::project_parallel(e, e.theta_star);
    const auto rep =
        attackability::attackability_index(e, proj, {.max_iter = 20000});
    CHECK(std::abs(e.target().dot(rep.certificate)) <= 1e-8);
    CHECK((proj.theta_parallel + rep.certificate).norm() <= 1.0 + 1e-8);
    for (int a = 0; a < e.num_arms(); ++a) {
      if (a == e.target_index) continue;
      CHECK(proj.target_mean >=
            rep.epsilon_star +
                e.arms[a].dot(proj.theta_parallel + rep.certificate) - 1e-7);
    }
  }
}

TEST_CASE("solve_theta0 closed form for two orthonormal arms") {
  std::vector<Vec> arms = {make_vec({1.0, 0.0}), make_vec({0.0, 1.0})};
  const auto res = attackability::solve_theta0(arms, 0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(res.epsilon0_star == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(res.theta0(0) == doctest::Approx(inv_sqrt2).epsilon(1e-5));
  CHECK(res.theta0(1) == doctest::Approx(-inv_sqrt2).epsilon(1e-5));
}

TEST_CASE("solve_theta0 degenerates on duplicate arms") {
  std::vector<Vec> arms = {make_vec({1.0, 0.0}), make_vec({1.0, 0.0})};
  const auto res = attackability::solve_theta0(arms, 0);
  CHECK(res.epsilon0_star == doctest::Approx(0.0));
}

TEST_CASE("solve_theta0 margin holds post hoc on a sampled pool") {
  env::RngStreams rng(99);
  const auto e = env::sample_environment(10, 30, 0.1, rng);
  const auto res = attackability::solve_theta0(e.arms, e.target_index);
  CHECK(res.epsilon0_star > 0.0);
  // under theta0 the target beats every other arm by exactly the reported gap
  const double target_value = e.target().dot(res.theta0);
  double best_other = -1e300;
  for (int a = 0; a < e.num_arms(); ++a) {
    if (a == e.target_index) continue;
    best_other = std::max(best_other, e.arms[a].dot(res.theta0));
  }
  CHECK(target_value - best_other == doctest::Approx(res.epsilon0_star));
}

TEST_CASE("index and certificate for the boundary-case fixture") {
  const auto e = env::load_instance(kFixtures / "appendix_d.json", true);
  const auto rep = attackability::attackability_index(
      e, attackability::project_parallel(e, e.theta_star));
  CHECK(rep.epsilon_star == doctest::Approx(-0.045 / 2.11).epsilon(1e-9));
  CHECK_FALSE(rep.attackable);
}
