#include "banditlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "banditlab/attackability.hpp"
#include "banditlab/bandits.hpp"
#include "banditlab/errors.hpp"

namespace banditlab::harness {

namespace {

/// Shortest round-trip decimal; locale-independent and byte-stable.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::string to_string(Victim v) {
  return v == Victim::LinUCB ? "linucb" : "robustphe";
}

std::string to_string(Attack a) {
  switch (a) {
    case Attack::None: return "none";
    case Attack::Oracle: return "oracle";
    default: return "two-stage";
  }
}

Victim victim_from_string(const std::string& s) {
  if (s == "linucb") return Victim::LinUCB;
  if (s == "robustphe") return Victim::RobustPhE;
  throw ConfigError("unknown victim '" + s + "' (expected linucb|robustphe)");
}

Attack attack_from_string(const std::string& s) {
  if (s == "none") return Attack::None;
  if (s == "oracle") return Attack::Oracle;
  if (s == "two-stage" || s == "twostage") return Attack::TwoStage;
  throw ConfigError("unknown attack '" + s + "' (expected none|oracle|two-stage)");
}

void ExperimentConfig::validate() const {
  if (T < 1) throw ConfigError("config: T must be >= 1, got " + std::to_string(T));
  if (d < 2) throw ConfigError("config: d must be >= 2, got " + std::to_string(d));
  if (k < 2) throw ConfigError("config: k must be >= 2, got " + std::to_string(k));
  if (sigma < 0.0) throw ConfigError("config: sigma must be >= 0");
  if (lambda <= 0.0) throw ConfigError("config: lambda must be > 0");
  if (delta <= 0.0 || delta >= 1.0) throw ConfigError("config: delta must be in (0,1)");
  if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  if (max_tries < 1) throw ConfigError("config: max_tries must be >= 1");
  if (attackable_margin < 0.0) {
    throw ConfigError("config: attackable_margin must be >= 0");
  }
  if (attack == Attack::TwoStage) {
    const long t1 = resolved_T1();
    if (t1 <= 0 || t1 >= T) {
      throw ConfigError("config: T1 must satisfy 0 < T1 < T, got T1=" +
                        std::to_string(t1) + " with T=" + std::to_string(T));
    }
  }
  if (env_source.kind == EnvSource::Kind::File && env_source.path.empty()) {
    throw ConfigError("config: env_source 'file' needs an instance path");
  }
}

long ExperimentConfig::resolved_T1() const {
  if (T1.has_value()) return *T1;
  const double exponent = victim == Victim::LinUCB ? 0.5 : 0.4;
  return static_cast<long>(std::ceil(std::pow(static_cast<double>(T), exponent)));
}

double ExperimentConfig::resolved_noise_scale() const {
  return noise_scale >= 0.0 ? noise_scale : sigma;
}

std::string ExperimentConfig::canonical_json() const {
  nlohmann::ordered_json j;
  j["d"] = d;
  j["k"] = k;
  j["sigma"] = sigma;
  j["T"] = T;
  if (T1.has_value()) j["T1"] = *T1; else j["T1"] = nullptr;
  j["victim"] = to_string(victim);
  j["attack"] = to_string(attack);
  j["lambda"] = lambda;
  j["delta"] = delta;
  j["seeds"] = seeds;
  switch (env_source.kind) {
    case EnvSource::Kind::Sample: j["env_source"] = "sample"; break;
    case EnvSource::Kind::SampleAttackable: j["env_source"] = "sample-attackable"; break;
    case EnvSource::Kind::File: j["env_source"] = env_source.path.string(); break;
  }
  j["allow_unnormalized"] = env_source.allow_unnormalized;
  j["max_tries"] = max_tries;
  j["attackable_margin"] = attackable_margin;
  j["compensate_vs_robustphe"] = compensate_vs_robustphe;
  j["solver_max_iter"] = solver_max_iter;
  j["noise_scale"] = noise_scale;
  return j.dump();
}

std::uint64_t ExperimentConfig::config_hash() const {
  return fnv1a(canonical_json());
}

bool lemma2_bound_holds(double lhs, double alpha, double s_prime, double gamma,
                        long t, double lambda) {
  const double bound = alpha + s_prime / std::sqrt(lambda) +
                       gamma * std::sqrt(static_cast<double>(t));
  return lhs <= bound;
}

namespace {

env::EnvironmentSpec build_env(const ExperimentConfig& cfg, env::RngStreams& rng,
                               int* tries_out) {
  *tries_out = 1;
  switch (cfg.env_source.kind) {
    case EnvSource::Kind::Sample:
      return env::sample_environment(cfg.d, cfg.k, cfg.sigma, rng);
    case EnvSource::Kind::SampleAttackable: {
      auto sampled = env::sample_attackable_environment(
          cfg.d, cfg.k, cfg.sigma, rng, cfg.max_tries, {}, cfg.attackable_margin);
      *tries_out = sampled.tries;
      return std::move(sampled.env);
    }
    case EnvSource::Kind::File:
    default: {
      auto e = env::load_instance(cfg.env_source.path,
                                  cfg.env_source.allow_unnormalized);
      e.noise_sigma = cfg.sigma;  // the run's noise level wins over the file's
      return e;
    }
  }
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  env::RngStreams rng(seed);
  RunResult result;
  result.config_hash = cfg.config_hash();
  result.seed = seed;

  env::EnvironmentSpec environment = build_env(cfg, rng, &result.summary.env_tries);
  const int k = environment.num_arms();
  const int target = environment.target_index;
  const double noise_scale = cfg.resolved_noise_scale();

  // Certify the true environment once per run; the certificate is also the
  // oracle attack's input.
  const auto proj_star =
      attackability::project_parallel(environment, environment.theta_star);
  attackability::SubgradientOptions sopts;
  sopts.max_iter = cfg.solver_max_iter;
  const auto true_report =
      attackability::attackability_index(environment, proj_star, sopts);
  result.summary.true_attackable = true_report.attackable;
  result.summary.epsilon_star = true_report.epsilon_star;

  // Victim
  std::optional<bandits::LinUcb> linucb;
  std::optional<bandits::RobustPhaseElimination> robustphe;
  if (cfg.victim == Victim::LinUCB) {
    bandits::LinUcb::Options lopt;
    lopt.lambda = cfg.lambda;
    lopt.delta = cfg.delta;
    lopt.noise_scale = noise_scale;
    linucb.emplace(environment.dim(), lopt);
  } else {
    bandits::RobustPhaseElimination::Options ropt;
    ropt.delta = cfg.delta;
    ropt.noise_scale = noise_scale;
    robustphe.emplace(environment.arms, ropt);
  }

  // Adversary
  std::optional<attacks::OracleNullSpaceAttack> oracle;
  std::optional<attacks::TwoStageNullSpaceAttack> two_stage;
  const long T1 = cfg.resolved_T1();
  if (cfg.attack == Attack::Oracle) {
    oracle.emplace(environment, true_report, cfg.sigma);
  } else if (cfg.attack == Attack::TwoStage) {
    attacks::TwoStageNullSpaceAttack::Options aopt;
    aopt.T = cfg.T;
    aopt.T1 = T1;
    aopt.attack_noise_sigma = cfg.sigma;
    aopt.compensate =
        cfg.victim == Victim::RobustPhE ? cfg.compensate_vs_robustphe : true;
    aopt.delta = cfg.delta;
    aopt.solver_max_iter = cfg.solver_max_iter;
    two_stage.emplace(environment.arms, target, aopt);
  }

  attacks::AttackLedger ledger;
  std::vector<long> pull_counts(k, 0);

  const double best_mean = [&] {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& x : environment.arms) {
      best = std::max(best, x.dot(environment.theta_star));
    }
    return best;
  }();

  for (long t = 1; t <= cfg.T; ++t) {
    int arm = 0;
    if (linucb) {
      arm = linucb->choose(environment.arms).arm_index;
    } else {
      arm = robustphe->choose().arm_index;
    }
    const auto draw = env::draw_reward(environment, arm, rng);

    double fed = draw.realized;
    if (oracle) {
      fed = oracle->intercept(t, arm, draw.realized, rng.attack_stream, ledger);
    } else if (two_stage) {
      fed = two_stage->intercept(t, arm, draw.realized, rng.attack_stream, ledger);
    } else {
      ledger.record(t, arm, arm == target, draw.realized, draw.realized, 0);
    }

    if (linucb) {
      linucb->update(environment.arms[arm], fed);
    } else {
      robustphe->update(arm, fed);
    }
    ++pull_counts[arm];
    result.summary.regret_vs_theta_star +=
        best_mean - environment.arms[arm].dot(environment.theta_star);

    if (linucb) {
      // exploration-bonus sanity: CB_t(x) <= alpha_t / sqrt(n(x))
      const double alpha = linucb->alpha();
      for (int a = 0; a < k; ++a) {
        if (pull_counts[a] == 0) continue;
        const double cb = linucb->confidence_bound(environment.arms[a]);
        if (cb > alpha / std::sqrt(static_cast<double>(pull_counts[a])) + 1e-9) {
          ++result.summary.cb_violations;
        }
      }
      // ridge-robustness monitor on the attacker's stage-2 parameter
      if (two_stage && two_stage->phase() ==
                           attacks::TwoStageNullSpaceAttack::Phase::Stage2) {
        if (t == T1 + 1 || t % T1 == 0) {
          Lemma2Checkpoint cp;
          cp.t = t;
          cp.lhs = linalg::quad_norm(two_stage->theta_tilde() - linucb->theta_hat(),
                                     linucb->design_matrix());
          cp.alpha = alpha;
          cp.s_prime = ledger.nontarget_cost();
          cp.gamma = ledger.max_target_corruption();
          cp.violated =
              !lemma2_bound_holds(cp.lhs, cp.alpha, cp.s_prime, cp.gamma, t,
                                  cfg.lambda);
          if (cp.violated) ++result.summary.lemma2_violations;
          result.lemma2_checkpoints.push_back(cp);
        }
      }
    }
  }

  result.round_log = ledger.entries();
  result.summary.target_pulls = ledger.target_pulls();
  result.summary.target_pull_fraction =
      static_cast<double>(ledger.target_pulls()) / static_cast<double>(cfg.T);
  result.summary.total_cost = ledger.total_cost();
  if (cfg.attack == Attack::TwoStage) {
    result.summary.stage1_cost = ledger.cost_between(0, T1);
    result.summary.stage2_cost = ledger.cost_between(T1, cfg.T);
  } else {
    result.summary.stage2_cost = ledger.total_cost();
  }
  if (two_stage) {
    result.summary.asserted_attackable = two_stage->asserted_attackable();
    result.summary.epsilon_tilde_star = two_stage->epsilon_tilde_star();
    result.summary.aborted =
        two_stage->phase() == attacks::TwoStageNullSpaceAttack::Phase::Aborted;
    result.summary.abort_reason = two_stage->abort_reason();
  } else if (oracle) {
    result.summary.asserted_attackable = true;
  }
  if (linucb) {
    result.summary.theta_norm_violations = linucb->norm_violations();
  }
  return result;
}

}  // namespace

std::vector<RunResult> run_campaign(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::future<RunResult>> futures;
  futures.reserve(cfg.seeds.size());
  for (const auto seed : cfg.seeds) {
    futures.push_back(std::async(std::launch::async,
                                 [&cfg, seed] { return run_single(cfg, seed); }));
  }
  std::vector<RunResult> results;
  results.reserve(cfg.seeds.size());
  for (auto& f : futures) results.push_back(f.get());
  return results;
}

std::string RunResult::summary_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["target_pulls"] = summary.target_pulls;
  j["target_pull_fraction"] = summary.target_pull_fraction;
  j["total_cost"] = summary.total_cost;
  j["stage1_cost"] = summary.stage1_cost;
  j["stage2_cost"] = summary.stage2_cost;
  j["asserted_attackable"] = summary.asserted_attackable;
  j["true_attackable"] = summary.true_attackable;
  j["epsilon_star"] = summary.epsilon_star;
  if (summary.epsilon_tilde_star.has_value()) {
    j["epsilon_tilde_star"] = *summary.epsilon_tilde_star;
  } else {
    j["epsilon_tilde_star"] = nullptr;
  }
  j["regret_vs_theta_star"] = summary.regret_vs_theta_star;
  j["lemma2_violations"] = summary.lemma2_violations;
  j["cb_violations"] = summary.cb_violations;
  j["theta_norm_violations"] = summary.theta_norm_violations;
  j["aborted"] = summary.aborted;
  j["abort_reason"] = summary.abort_reason;
  j["env_tries"] = summary.env_tries;
  return j.dump(2);
}

void write_round_csv(const RunResult& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_round_csv: cannot open " + path.string());
  out << "round,arm_index,is_target,true_reward,fed_reward,delta,cum_cost,"
         "cum_target_pulls,phase\n";
  for (const auto& e : run.round_log) {
    out << e.round << ',' << e.arm_index << ',' << (e.is_target ? 1 : 0) << ','
        << format_double(e.true_reward) << ',' << format_double(e.fed_reward)
        << ',' << format_double(e.delta) << ',' << format_double(e.cum_cost)
        << ',' << e.cum_target_pulls << ',' << e.phase << '\n';
  }
}

void write_summary_json(const RunResult& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_summary_json: cannot open " + path.string());
  out << run.summary_json() << "\n";
}

void write_curve_files(const RunResult& run, const std::filesystem::path& dir,
                       const std::string& stem) {
  {
    std::ofstream out(dir / (stem + "_cost_curve.csv"));
    if (!out) throw Error("write_curve_files: cannot open cost curve file");
    out << "t,cum_cost\n";
    for (const auto& e : run.round_log) {
      out << e.round << ',' << format_double(e.cum_cost) << '\n';
    }
  }
  {
    std::ofstream out(dir / (stem + "_target_pulls_curve.csv"));
    if (!out) throw Error("write_curve_files: cannot open pulls curve file");
    out << "t,cum_target_pulls\n";
    for (const auto& e : run.round_log) {
      out << e.round << ',' << e.cum_target_pulls << '\n';
    }
  }
}

SweepResult false_negative_sweep(const ExperimentConfig& base_cfg,
                                 const std::vector<long>& T1_values,
                                 const std::vector<double>& sigma_values,
                                 int reps) {
  if (base_cfg.env_source.kind != EnvSource::Kind::File) {
    throw ConfigError("false_negative_sweep: needs a fixture environment");
  }
  env::EnvironmentSpec fixture = env::load_instance(
      base_cfg.env_source.path, base_cfg.env_source.allow_unnormalized);

  // Precondition: the fixture is attackable per the certificate program.
  const auto proj = attackability::project_parallel(fixture, fixture.theta_star);
  const auto report = attackability::attackability_index(fixture, proj);
  if (!report.attackable) {
    throw ConfigError("false_negative_sweep: fixture is not attackable "
                      "(epsilon* = " + std::to_string(report.epsilon_star) + ")");
  }

  SweepResult result;
  for (const double sigma : sigma_values) {
    for (const long T1 : T1_values) {
      SweepCell cell;
      cell.T1 = T1;
      cell.sigma = sigma;
      cell.reps = reps;
      for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t seed =
            fnv1a("sweep:" + std::to_string(T1) + ":" + format_double(sigma) +
                  ":" + std::to_string(rep));
        env::RngStreams rng(seed);
        env::EnvironmentSpec e = fixture;
        e.noise_sigma = sigma;

        bandits::LinUcb::Options lopt;
        lopt.lambda = base_cfg.lambda;
        lopt.delta = base_cfg.delta;
        lopt.noise_scale = base_cfg.noise_scale >= 0.0 ? base_cfg.noise_scale : sigma;
        bandits::LinUcb victim(e.dim(), lopt);

        attacks::TwoStageNullSpaceAttack::Options aopt;
        aopt.T = T1 + 1;  // the sweep only needs the boundary assertion
        aopt.T1 = T1;
        aopt.attack_noise_sigma = sigma;
        aopt.solver_max_iter = base_cfg.solver_max_iter;
        attacks::TwoStageNullSpaceAttack adversary(e.arms, e.target_index, aopt);

        attacks::AttackLedger ledger;
        for (long t = 1; t <= T1; ++t) {
          const int arm = victim.choose(e.arms).arm_index;
          const auto draw = env::draw_reward(e, arm, rng);
          const double fed =
              adversary.intercept(t, arm, draw.realized, rng.attack_stream, ledger);
          victim.update(e.arms[arm], fed);
        }
        if (!adversary.asserted_attackable()) ++cell.asserted_not_attackable;
      }
      cell.rate = static_cast<double>(cell.asserted_not_attackable) /
                  static_cast<double>(reps);
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "T1,sigma,reps,asserted_not_attackable,false_negative_rate\n";
  for (const auto& c : cells) {
    out << c.T1 << ',' << format_double(c.sigma) << ',' << c.reps << ','
        << c.asserted_not_attackable << ',' << format_double(c.rate) << '\n';
  }
  return out.str();
}

ProbeReport sublinearity_probe(const ExperimentConfig& cfg,
                               const std::vector<long>& checkpoints) {
  if (checkpoints.size() < 2) {
    throw ConfigError("sublinearity_probe: need at least 2 checkpoints");
  }
  ProbeReport report;
  for (const long T : checkpoints) {
    ExperimentConfig c = cfg;
    c.T = T;
    c.T1.reset();  // per-victim default rule at each horizon
    const auto runs = run_campaign(c);
    ProbeCheckpoint cp;
    cp.T = T;
    for (const auto& r : runs) {
      cp.per_seed_cost.push_back(r.summary.total_cost);
      cp.mean_cost += r.summary.total_cost;
    }
    cp.mean_cost /= static_cast<double>(runs.size());
    cp.mean_cost_over_T = cp.mean_cost / static_cast<double>(T);
    report.checkpoints.push_back(std::move(cp));
  }

  // least-squares slope of log C vs log T (costs of zero contribute nothing)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& cp : report.checkpoints) {
    if (cp.mean_cost <= 0.0) continue;
    const double x = std::log(static_cast<double>(cp.T));
    const double y = std::log(cp.mean_cost);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n >= 2 && sxx * n - sx * sx > 0.0) {
    report.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return report;
}

std::string ProbeReport::to_csv() const {
  std::ostringstream out;
  out << "T,mean_cost,mean_cost_over_T\n";
  for (const auto& cp : checkpoints) {
    out << cp.T << ',' << format_double(cp.mean_cost) << ','
        << format_double(cp.mean_cost_over_T) << '\n';
  }
  return out.str();
}

}  // namespace banditlab::harness
