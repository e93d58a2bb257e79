#pragma once

#include "grape/results.hpp"
#include "grape/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grape {

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { kDpNoise, kErrorDecay, kVarianceLimit, kNChainEval, kFrozenLakeControl };

std::string experiment_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kDpNoise;
  std::string env = "frozenlake8x8";
  /// retrace, retrace-lr or grape; which ones apply depends on the kind.
  std::string algo = "grape";

  std::vector<double> alpha;
  std::vector<double> eta;
  std::vector<double> lambda{0.8};
  std::vector<double> sigma;
  std::vector<double> beta;
  std::vector<std::int64_t> n{250};
  double gamma = 0.99;

  // dp-noise
  int iters = 1000;
  // error-decay
  double delta = 0.5;
  int horizon = 50;
  // variance-limit
  std::int64_t k = 2000;
  std::int64_t samples = 100000;
  // nchain-eval
  double slip = 0.0;
  int blocks = 800;
  int block_size = 250;
  // frozenlake-control
  std::int64_t steps = 5'000'000;
  std::int64_t policy_period = 100'000;
  std::int64_t buffer_capacity = 500'000;

  int trials = 1;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  std::filesystem::path out = "results";

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Number of independent runs the grid expands to, times trials.
std::size_t run_count(const ExperimentConfig& cfg);

/**
 * Runs the full grid x trials. Trial t of every grid point draws from
 * substream(seed, t), so grid points share random inputs and a trial's rows
 * do not depend on how many trials run. Rows are ordered by grid point, then
 * trial, then step, whatever the thread count.
 */
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<BetaChoice> best_beta;
};

/// run_experiment plus aggregation, and beta selection for control runs.
ExperimentOutput run_and_summarize(const ExperimentConfig& cfg);

/**
 * Writes <out>/<name>.csv, <out>/<name>_summary.csv and, for control runs,
 * <out>/<name>_best_beta.csv. Returns the paths written.
 */
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& output);

/// Runs `count` tasks on up to `threads` workers. Each task writes only its own slot.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace grape
