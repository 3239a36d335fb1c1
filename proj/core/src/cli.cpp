#include "banditlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "banditlab/attackability.hpp"
#include "banditlab/errors.hpp"
#include "banditlab/harness.hpp"

namespace banditlab::cli {

namespace {

namespace fs = std::filesystem;

harness::ExperimentConfig config_from_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }

  harness::ExperimentConfig cfg;
  static const std::vector<std::string> known = {
      "d", "k", "sigma", "T", "T1", "victim", "attack", "lambda", "delta",
      "seeds", "env_source", "allow_unnormalized", "max_tries",
      "attackable_margin", "compensate_vs_robustphe", "solver_max_iter",
      "noise_scale"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown field '" + key + "'");
    }
  }
  try {
    if (j.contains("d")) cfg.d = j["d"].get<int>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
    if (j.contains("T")) cfg.T = j["T"].get<long>();
    if (j.contains("T1") && !j["T1"].is_null()) cfg.T1 = j["T1"].get<long>();
    if (j.contains("victim")) cfg.victim = harness::victim_from_string(j["victim"]);
    if (j.contains("attack")) cfg.attack = harness::attack_from_string(j["attack"]);
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("env_source")) {
      const std::string src = j["env_source"].get<std::string>();
      if (src == "sample") {
        cfg.env_source.kind = harness::EnvSource::Kind::Sample;
      } else if (src == "sample-attackable") {
        cfg.env_source.kind = harness::EnvSource::Kind::SampleAttackable;
      } else {
        cfg.env_source.kind = harness::EnvSource::Kind::File;
        cfg.env_source.path = src;
      }
    }
    if (j.contains("allow_unnormalized")) {
      cfg.env_source.allow_unnormalized = j["allow_unnormalized"].get<bool>();
    }
    if (j.contains("max_tries")) cfg.max_tries = j["max_tries"].get<int>();
    if (j.contains("attackable_margin")) {
      cfg.attackable_margin = j["attackable_margin"].get<double>();
    }
    if (j.contains("compensate_vs_robustphe")) {
      cfg.compensate_vs_robustphe = j["compensate_vs_robustphe"].get<bool>();
    }
    if (j.contains("solver_max_iter")) cfg.solver_max_iter = j["solver_max_iter"].get<long>();
    if (j.contains("noise_scale")) cfg.noise_scale = j["noise_scale"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }
  return cfg;
}

nlohmann::ordered_json report_to_json(const attackability::AttackabilityReport& rep) {
  nlohmann::ordered_json j;
  j["epsilon_star"] = rep.epsilon_star;
  j["attackable"] = rep.attackable;
  j["certificate"] = std::vector<double>(rep.certificate.data(),
                                         rep.certificate.data() + rep.certificate.size());
  j["method"] = attackability::to_string(rep.method);
  j["iterations"] = rep.iterations;
  j["duality_gap_bound"] = rep.duality_gap_bound;
  return j;
}

struct RunFlags {
  std::string config_path;
  std::string victim, attack, env_source_str, instance;
  long T = -1, T1 = -1, solver_max_iter = -1;
  int d = -1, k = -1, max_tries = -1;
  double sigma = -1.0, lambda = -1.0, delta = -1.0, noise_scale = -1.0;
  double attackable_margin = -1.0;
  std::vector<std::uint64_t> seeds;
  bool allow_unnormalized = false;
  bool compensate_vs_robustphe = false;
  std::string out_dir = "out";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config mirroring the experiment fields");
  cmd->add_option("--victim", f.victim, "linucb|robustphe");
  cmd->add_option("--attack", f.attack, "none|oracle|two-stage");
  cmd->add_option("--T", f.T, "horizon");
  cmd->add_option("--T1", f.T1, "stage-1 length (default: per-victim rule)");
  cmd->add_option("--d", f.d, "ambient dimension");
  cmd->add_option("--k", f.k, "arm pool size");
  cmd->add_option("--sigma", f.sigma, "reward noise std");
  cmd->add_option("--lambda", f.lambda, "ridge coefficient");
  cmd->add_option("--delta", f.delta, "confidence level");
  cmd->add_option("--seed", f.seeds, "seed (repeatable)");
  cmd->add_option("--env", f.env_source_str, "sample|sample-attackable|file");
  cmd->add_option("--instance", f.instance, "instance JSON (with --env file)");
  cmd->add_flag("--allow-unnormalized", f.allow_unnormalized,
                "accept instance files with norms above 1");
  cmd->add_option("--max-tries", f.max_tries, "sampling budget for attackable envs");
  cmd->add_option("--attackable-margin", f.attackable_margin,
                  "required attackability-index margin when sampling");
  cmd->add_option("--solver-max-iter", f.solver_max_iter, "certificate solver budget");
  cmd->add_option("--noise-scale", f.noise_scale,
                  "confidence-width noise scale (default: sigma)");
  cmd->add_flag("--compensate-vs-robustphe", f.compensate_vs_robustphe,
                "restore the stage-2 compensation against robustphe");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
}

harness::ExperimentConfig resolve_config(const CLI::App* cmd, const RunFlags& f) {
  harness::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = config_from_json(f.config_path);
  if (cmd->count("--victim")) cfg.victim = harness::victim_from_string(f.victim);
  if (cmd->count("--attack")) cfg.attack = harness::attack_from_string(f.attack);
  if (cmd->count("--T")) cfg.T = f.T;
  if (cmd->count("--T1")) cfg.T1 = f.T1;
  if (cmd->count("--d")) cfg.d = f.d;
  if (cmd->count("--k")) cfg.k = f.k;
  if (cmd->count("--sigma")) cfg.sigma = f.sigma;
  if (cmd->count("--lambda")) cfg.lambda = f.lambda;
  if (cmd->count("--delta")) cfg.delta = f.delta;
  if (cmd->count("--seed")) cfg.seeds = f.seeds;
  if (cmd->count("--env")) {
    if (f.env_source_str == "sample") {
      cfg.env_source.kind = harness::EnvSource::Kind::Sample;
    } else if (f.env_source_str == "sample-attackable") {
      cfg.env_source.kind = harness::EnvSource::Kind::SampleAttackable;
    } else if (f.env_source_str == "file") {
      cfg.env_source.kind = harness::EnvSource::Kind::File;
    } else {
      throw ConfigError("--env must be sample|sample-attackable|file, got '" +
                        f.env_source_str + "'");
    }
  }
  if (cmd->count("--instance")) {
    cfg.env_source.kind = harness::EnvSource::Kind::File;
    cfg.env_source.path = f.instance;
  }
  if (cmd->count("--allow-unnormalized")) cfg.env_source.allow_unnormalized = true;
  if (cmd->count("--max-tries")) cfg.max_tries = f.max_tries;
  if (cmd->count("--attackable-margin")) cfg.attackable_margin = f.attackable_margin;
  if (cmd->count("--solver-max-iter")) cfg.solver_max_iter = f.solver_max_iter;
  if (cmd->count("--noise-scale")) cfg.noise_scale = f.noise_scale;
  if (cmd->count("--compensate-vs-robustphe")) cfg.compensate_vs_robustphe = true;
  cfg.validate();
  return cfg;
}

int do_check(const std::string& instance, bool allow_unnormalized, long max_iter) {
  const auto environment = env::load_instance(instance, allow_unnormalized);
  const auto proj =
      attackability::project_parallel(environment, environment.theta_star);
  attackability::SubgradientOptions opts;
  if (max_iter > 0) opts.max_iter = max_iter;
  const auto report = attackability::attackability_index(environment, proj, opts);
  std::cout << report_to_json(report).dump(2) << "\n";
  return 0;
}

int do_run(const CLI::App* cmd, const RunFlags& flags) {
  const auto cfg = resolve_config(cmd, flags);
  fs::create_directories(flags.out_dir);
  const auto results = harness::run_campaign(cfg);
  for (const auto& run : results) {
    const std::string stem = "run_seed" + std::to_string(run.seed);
    harness::write_round_csv(run, fs::path(flags.out_dir) / (stem + ".csv"));
    harness::write_summary_json(run, fs::path(flags.out_dir) / (stem + ".json"));
    harness::write_curve_files(run, flags.out_dir, stem);
    std::cout << "seed " << run.seed << ": target_pull_fraction="
              << run.summary.target_pull_fraction
              << " total_cost=" << run.summary.total_cost
              << (run.summary.aborted ? " (adversary aborted)" : "") << "\n";
  }
  return 0;
}

int do_sweep(const CLI::App* cmd, const RunFlags& flags,
             const std::vector<long>& t1_values,
             const std::vector<double>& sigma_values, int reps) {
  auto cfg = resolve_config(cmd, flags);
  if (cfg.env_source.kind != harness::EnvSource::Kind::File) {
    throw ConfigError("sweep: pass the fixture via --instance");
  }
  cfg.attack = harness::Attack::TwoStage;
  const auto sweep = harness::false_negative_sweep(cfg, t1_values, sigma_values, reps);
  fs::create_directories(flags.out_dir);
  std::ofstream out(fs::path(flags.out_dir) / "sweep.csv");
  out << sweep.to_csv();
  std::cout << sweep.to_csv();
  return 0;
}

int do_probe(const CLI::App* cmd, const RunFlags& flags,
             const std::vector<long>& checkpoints) {
  const auto cfg = resolve_config(cmd, flags);
  const auto report = harness::sublinearity_probe(cfg, checkpoints);
  fs::create_directories(flags.out_dir);
  std::ofstream out(fs::path(flags.out_dir) / "probe.csv");
  out << report.to_csv();
  std::cout << report.to_csv();
  std::cout << "fitted_exponent," << report.fitted_exponent << "\n";
  return 0;
}

int do_sample_env(int d, int k, double sigma, std::uint64_t seed, bool attackable,
                  int max_tries, double margin, const std::string& out_path) {
  env::RngStreams rng(seed);
  env::EnvironmentSpec e;
  int tries = 1;
  if (attackable) {
    auto sampled =
        env::sample_attackable_environment(d, k, sigma, rng, max_tries, {}, margin);
    e = std::move(sampled.env);
    tries = sampled.tries;
  } else {
    e = env::sample_environment(d, k, sigma, rng);
  }
  env::save_instance(e, out_path);
  std::cout << "wrote " << out_path << " (tries=" << tries << ")\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Reward-poisoning laboratory for k-armed linear stochastic bandits"};
  app.require_subcommand(1);

  // check
  std::string check_instance;
  bool check_allow_unnormalized = false;
  long check_max_iter = -1;
  auto* check = app.add_subcommand(
      "check", "Attackability certificate for an instance file");
  check->add_option("instance", check_instance, "instance JSON")->required();
  check->add_flag("--allow-unnormalized", check_allow_unnormalized,
                  "accept norms above 1");
  check->add_option("--max-iter", check_max_iter, "certificate solver budget");

  // run
  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run an attack campaign");
  add_run_flags(run, run_flags);

  // sweep
  RunFlags sweep_flags;
  std::vector<long> sweep_t1 = {1, 2, 5, 10, 20, 50, 100};
  std::vector<double> sweep_sigma = {0.1, 0.3};
  int sweep_reps = 100;
  auto* sweep = app.add_subcommand(
      "sweep", "False-negative rate of the stage-boundary attackability test");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--T1-values", sweep_t1, "stage-1 lengths")->delimiter(',');
  sweep->add_option("--sigma-values", sweep_sigma, "noise levels")->delimiter(',');
  sweep->add_option("--reps", sweep_reps, "repetitions per cell");

  // probe
  RunFlags probe_flags;
  std::vector<long> probe_checkpoints = {2500, 10000};
  auto* probe = app.add_subcommand(
      "probe", "Cost growth across horizons and the fitted exponent");
  add_run_flags(probe, probe_flags);
  probe->add_option("--checkpoints", probe_checkpoints, "horizons")->delimiter(',');

  // sample-env
  int se_d = 10, se_k = 30, se_max_tries = 1000;
  double se_sigma = 0.1, se_margin = 0.0;
  std::uint64_t se_seed = 1;
  bool se_attackable = false;
  std::string se_out = "instance.json";
  auto* sample_env = app.add_subcommand("sample-env", "Sample an instance file");
  sample_env->add_option("--d", se_d, "dimension");
  sample_env->add_option("--k", se_k, "arm pool size");
  sample_env->add_option("--sigma", se_sigma, "noise std");
  sample_env->add_option("--seed", se_seed, "master seed");
  sample_env->add_flag("--attackable", se_attackable,
                       "re-sample until certified attackable");
  sample_env->add_option("--max-tries", se_max_tries, "sampling budget");
  sample_env->add_option("--margin", se_margin, "required index margin");
  sample_env->add_option("--out", se_out, "output path");

  try {
    app.parse(argc, argv);
    if (check->parsed()) {
      return do_check(check_instance, check_allow_unnormalized, check_max_iter);
    }
    if (run->parsed()) return do_run(run, run_flags);
    if (sweep->parsed()) {
      return do_sweep(sweep, sweep_flags, sweep_t1, sweep_sigma, sweep_reps);
    }
    if (probe->parsed()) return do_probe(probe, probe_flags, probe_checkpoints);
    if (sample_env->parsed()) {
      return do_sample_env(se_d, se_k, se_sigma, se_seed, se_attackable,
                           se_max_tries, se_margin, se_out);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ExhaustedTries& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("banditlab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace banditlab::cli
