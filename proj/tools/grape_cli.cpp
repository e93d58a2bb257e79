// Command-line front end for the experiments and verification suites.

#include "grape/experiments.hpp"
#include "grape/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <exception>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

const std::vector<double> kBetaGrid{0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100};

void add_common(CLI::App* sub, grape::ExperimentConfig& cfg, bool seeded) {
  if (seeded) sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_rates(CLI::App* sub, grape::ExperimentConfig& cfg) {
  sub->add_option("--algo", cfg.algo, "Algorithm")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "GRAPE alpha values");
  sub->add_option("--eta", cfg.eta, "Retrace-LR learning rates");
  sub->add_option("--lambda", cfg.lambda, "Trace decay values")->capture_default_str();
  sub->add_option("--gamma", cfg.gamma, "Discount factor")->capture_default_str();
  sub->add_option("--trials", cfg.trials, "Trials per grid point")->capture_default_str();
}

int run(const grape::ExperimentConfig& cfg) {
  const grape::ExperimentOutput output = grape::run_and_summarize(cfg);
  for (const auto& path : grape::write_outputs(cfg, output)) std::cout << path.string() << '\n';
  return kExitOk;
}

int run_verify(const std::string& suite_name, std::uint64_t seed) {
  const grape::VerifySuite suite = grape::parse_suite(suite_name);
  bool all = true;
  for (const grape::CheckResult& r : grape::run_verify_suite(suite, seed)) {
    std::cout << fmt::format("{} {} ({})\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    all = all && r.passed;
  }
  return all ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular policy-evaluation experiments"};
  app.set_config("--config", "", "INI file; one section per subcommand, flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  grape::ExperimentConfig dp;
  dp.kind = grape::ExperimentKind::kDpNoise;
  dp.algo = "retrace";
  dp.trials = 100;
  auto* dp_cmd = app.add_subcommand("dp-noise", "Exact DP with injected Gaussian noise");
  add_rates(dp_cmd, dp);
  dp_cmd->add_option("--env", dp.env, "frozenlake8x8, nchain or two-state")->capture_default_str();
  dp_cmd->add_option("--sigma", dp.sigma, "Noise standard deviations")->required();
  dp_cmd->add_option("--slip", dp.slip, "Slip probability when env = nchain")->capture_default_str();
  dp_cmd->add_option("--iters", dp.iters, "Iterations per trial")->capture_default_str();
  add_common(dp_cmd, dp, true);

  grape::ExperimentConfig decay;
  decay.kind = grape::ExperimentKind::kErrorDecay;
  auto* decay_cmd = app.add_subcommand("error-decay", "Weight of the error made at iteration k");
  decay_cmd->add_option("--alpha", decay.alpha, "alpha values")->required();
  decay_cmd->add_option("--delta", decay.delta, "Contraction modulus")->capture_default_str();
  decay_cmd->add_option("--K", decay.horizon, "Number of iterations")->capture_default_str();
  add_common(decay_cmd, decay, false);

  grape::ExperimentConfig var;
  var.kind = grape::ExperimentKind::kVarianceLimit;
  auto* var_cmd = app.add_subcommand("variance-limit", "Variance of the averaged accumulated error");
  var_cmd->add_option("--alpha", var.alpha, "alpha values")->required();
  var_cmd->add_option("--k", var.k, "Iteration index")->capture_default_str();
  var_cmd->add_option("--samples", var.samples, "Monte-Carlo noise sequences")->capture_default_str();
  add_common(var_cmd, var, true);

  grape::ExperimentConfig chain;
  chain.kind = grape::ExperimentKind::kNChainEval;
  chain.lambda = {0.0};
  chain.trials = 24;
  auto* chain_cmd = app.add_subcommand("nchain-eval", "Model-free policy evaluation on NChain");
  add_rates(chain_cmd, chain);
  chain_cmd->add_option("--slip", chain.slip, "Slip probability")->capture_default_str();
  chain_cmd->add_option("--blocks", chain.blocks, "Value updates per trial")->capture_default_str();
  chain_cmd->add_option("--block-size", chain.block_size, "Steps per block")->capture_default_str();
  add_common(chain_cmd, chain, true);

  grape::ExperimentConfig lake;
  lake.kind = grape::ExperimentKind::kFrozenLakeControl;
  lake.beta = kBetaGrid;
  lake.lambda = {0.0};
  lake.trials = 6;
  auto* lake_cmd = app.add_subcommand("frozenlake-control", "Model-free control on FrozenLake 8x8");
  add_rates(lake_cmd, lake);
  lake_cmd->add_option("--N", lake.n, "Steps between value updates")->capture_default_str();
  lake_cmd->add_option("--beta", lake.beta, "Inverse temperatures")->capture_default_str();
  lake_cmd->add_option("--steps", lake.steps, "Environment steps per trial")->capture_default_str();
  lake_cmd->add_option("--policy-period", lake.policy_period, "Steps between policy updates")
      ->capture_default_str();
  lake_cmd->add_option("--buffer-capacity", lake.buffer_capacity, "Replay buffer size")->capture_default_str();
  add_common(lake_cmd, lake, true);

  std::string suite;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite and print pass/fail lines");
  verify_cmd->add_option("--suite", suite, "lemmas, theorems or estimators")->required();
  verify_cmd->add_option("--seed", verify_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*verify_cmd) return run_verify(suite, verify_seed);
    if (*dp_cmd) return run(dp);
    if (*decay_cmd) return run(decay);
    if (*var_cmd) return run(var);
    if (*chain_cmd) return run(chain);
    return run(lake);
  } catch (const grape::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
