#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "banditlab/harness.hpp"

using namespace banditlab;

namespace {

const std::filesystem::path kFixtures = BANDITLAB_FIXTURES_DIR;

harness::ExperimentConfig small_config() {
  harness::ExperimentConfig cfg;
  cfg.d = 4;
  cfg.k = 8;
  cfg.sigma = 0.1;
  cfg.T = 400;
  cfg.seeds = {11, 12, 13};
  cfg.env_source.kind = harness::EnvSource::Kind::SampleAttackable;
  return cfg;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  harness::ExperimentConfig cfg = small_config();
  cfg.T = -5;
  CHECK_THROWS_WITH_AS(cfg.validate(),
                       "config: T must be >= 1, got -5", ConfigError);
  cfg = small_config();
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.attack = harness::Attack::TwoStage;
  cfg.T1 = 500;  // >= T
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("stage-1 horizon defaults follow the per-victim rule") {
  harness::ExperimentConfig cfg;
  cfg.T = 10000;
  cfg.victim = harness::Victim::LinUCB;
  CHECK(cfg.resolved_T1() == 100);  // ceil(T^(1/2))
  cfg.victim = harness::Victim::RobustPhE;
  CHECK(cfg.resolved_T1() == 40);  // ceil(T^(2/5))
  cfg.T1 = 77;
  CHECK(cfg.resolved_T1() == 77);
}

TEST_CASE("clean campaigns cost nothing") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::None;
  const auto runs = harness::run_campaign(cfg);
  REQUIRE(runs.size() == 3);
  for (const auto& r : runs) {
    CHECK(r.summary.total_cost == 0.0);
    CHECK(r.summary.cb_violations == 0);
    CHECK(r.summary.true_attackable);
    for (const auto& e : r.round_log) CHECK(e.delta == 0.0);
  }
}

TEST_CASE("campaigns replay byte-identically") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::TwoStage;
  cfg.T1 = 20;
  cfg.seeds = {42};
  const auto a = harness::run_campaign(cfg);
  const auto b = harness::run_campaign(cfg);
  REQUIRE(a.size() == 1);
  CHECK(a[0].summary_json() == b[0].summary_json());

  const auto tmp = std::filesystem::temp_directory_path();
  harness::write_round_csv(a[0], tmp / "runA.csv");
  harness::write_round_csv(b[0], tmp / "runB.csv");
  std::ifstream fa(tmp / "runA.csv"), fb(tmp / "runB.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().substr(0, sa.str().find('\n')) ==
        "round,arm_index,is_target,true_reward,fed_reward,delta,cum_cost,"
        "cum_target_pulls,phase");
  std::filesystem::remove(tmp / "runA.csv");
  std::filesystem::remove(tmp / "runB.csv");
}

TEST_CASE("summary cost equals the per-round ledger sum") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::Oracle;
  cfg.seeds = {5};
  const auto runs = harness::run_campaign(cfg);
  double total = 0.0;
  for (const auto& e : runs[0].round_log) total += std::abs(e.delta);
  CHECK(total == runs[0].summary.total_cost);  // same order, same rounding
  CHECK(runs[0].summary.stage1_cost + runs[0].summary.stage2_cost ==
        doctest::Approx(runs[0].summary.total_cost));
}

TEST_CASE("oracle campaigns never touch the target arm") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::Oracle;
  cfg.T = 800;
  const auto runs = harness::run_campaign(cfg);
  for (const auto& r : runs) {
    for (const auto& e : r.round_log) {
      if (e.is_target) CHECK(e.delta == 0.0);
    }
    CHECK(r.summary.asserted_attackable);
  }
}

TEST_CASE("two-stage campaign summaries decompose the cost by stage") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::TwoStage;
  cfg.T = 600;
  cfg.T1 = 30;
  const auto runs = harness::run_campaign(cfg);
  for (const auto& r : runs) {
    double s1 = 0.0, s2 = 0.0;
    for (const auto& e : r.round_log) {
      (e.round <= 30 ? s1 : s2) += std::abs(e.delta);
    }
    CHECK(r.summary.stage1_cost == doctest::Approx(s1));
    CHECK(r.summary.stage2_cost == doctest::Approx(s2));
    CHECK(r.summary.target_pulls <= cfg.T);
  }
}

TEST_CASE("ridge-robustness checkpoints hold and the forged control fails") {
  harness::ExperimentConfig cfg;
  cfg.d = 6;
  cfg.k = 12;
  cfg.sigma = 0.1;
  cfg.T = 2000;
  cfg.T1 = 45;
  cfg.attack = harness::Attack::TwoStage;
  cfg.seeds = {1, 2, 3};
  const auto runs = harness::run_campaign(cfg);
  bool any_checkpoint = false;
  bool forged_violation = false;
  for (const auto& r : runs) {
    CHECK(r.summary.lemma2_violations == 0);
    for (const auto& cp : r.lemma2_checkpoints) {
      any_checkpoint = true;
      CHECK(harness::lemma2_bound_holds(cp.lhs, cp.alpha, cp.s_prime, cp.gamma,
                                        cp.t, cfg.lambda));
      // negative control: zeroing out the corruption budget must break the
      // bound somewhere, otherwise the monitor is vacuous
      if (!harness::lemma2_bound_holds(cp.lhs, cp.alpha, 0.0, 0.0, cp.t,
                                       cfg.lambda)) {
        forged_violation = true;
      }
    }
  }
  CHECK(any_checkpoint);
  CHECK(forged_violation);
}

TEST_CASE("false-negative sweep rejects fixtures the oracle calls unattackable") {
  harness::ExperimentConfig cfg;
  cfg.env_source.kind = harness::EnvSource::Kind::File;
  cfg.env_source.path = kFixtures / "appendix_d.json";
  cfg.env_source.allow_unnormalized = true;
  CHECK_THROWS_AS(harness::false_negative_sweep(cfg, {5}, {0.1}, 3), ConfigError);
}

TEST_CASE("false-negative sweep is exact in the noiseless limit") {
  harness::ExperimentConfig cfg;
  cfg.env_source.kind = harness::EnvSource::Kind::File;
  cfg.env_source.path = kFixtures / "appendix_d_normalized.json";
  const auto sweep = harness::false_negative_sweep(cfg, {1, 5}, {0.0}, 5);
  REQUIRE(sweep.cells.size() == 2);
  for (const auto& cell : sweep.cells) {
    CHECK(cell.rate == 0.0);  // no estimation noise, no wrong assertion
  }
  const auto csv = sweep.to_csv();
  CHECK(csv.find("T1,sigma,reps,asserted_not_attackable,false_negative_rate") !=
        std::string::npos);
}

TEST_CASE("probe reports zero cost and exponent for clean runs") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::None;
  cfg.seeds = {3};
  const auto report = harness::sublinearity_probe(cfg, {100, 200});
  REQUIRE(report.checkpoints.size() == 2);
  CHECK(report.checkpoints[0].mean_cost == 0.0);
  CHECK(report.checkpoints[1].mean_cost == 0.0);
  CHECK(report.fitted_exponent == 0.0);
}

TEST_CASE("summary json carries the run verdicts") {
  auto cfg = small_config();
  cfg.attack = harness::Attack::TwoStage;
  cfg.T1 = 20;
  cfg.seeds = {8};
  const auto runs = harness::run_campaign(cfg);
  const auto json = runs[0].summary_json();
  CHECK(json.find("\"true_attackable\": true") != std::string::npos);
  CHECK(json.find("\"epsilon_star\"") != std::string::npos);
  CHECK(json.find("\"target_pull_fraction\"") != std::string::npos);
}
