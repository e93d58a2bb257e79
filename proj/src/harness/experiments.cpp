#include "grape/experiments.hpp"

#include "grape/dp_lab.hpp"
#include "grape/model_free.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace grape {

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kDpNoise: return "dp-noise";
    case ExperimentKind::kErrorDecay: return "error-decay";
    case ExperimentKind::kVarianceLimit: return "variance-limit";
    case ExperimentKind::kNChainEval: return "nchain-eval";
    case ExperimentKind::kFrozenLakeControl: return "frozenlake-control";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(fmt::format("{}: {}", field, why));
}

void require_nonempty(const std::vector<double>& v, const char* field) {
  if (v.empty()) fail(field, "list must not be empty");
}

void require_in(const std::vector<double>& v, const char* field, double lo, double hi, bool lo_open = false,
                bool hi_open = false) {
  for (double x : v) {
    const bool below = lo_open ? !(x > lo) : !(x >= lo);
    const bool above = hi_open ? !(x < hi) : !(x <= hi);
    if (below || above) {
      fail(field, fmt::format("value {} outside {}{}, {}{}", x, lo_open ? '(' : '[', lo, hi, hi_open ? ')' : ']'));
    }
  }
}

bool uses_eta(const std::string& algo) { return algo == "retrace-lr"; }
bool uses_alpha(const std::string& algo) { return algo == "grape"; }

void validate_algo_grid(const ExperimentConfig& c, bool allow_plain_retrace) {
  const bool known = c.algo == "grape" || c.algo == "retrace-lr" || (allow_plain_retrace && c.algo == "retrace");
  if (!known) fail("algo", fmt::format("unsupported value '{}'", c.algo));
  if (uses_alpha(c.algo)) {
    require_nonempty(c.alpha, "alpha");
    require_in(c.alpha, "alpha", 0.0, 1.0);
    if (!c.eta.empty()) fail("eta", "only applies to retrace-lr");
  } else if (uses_eta(c.algo)) {
    require_nonempty(c.eta, "eta");
    require_in(c.eta, "eta", 0.0, 1.0, true);
    if (!c.alpha.empty()) fail("alpha", "only applies to grape");
  } else if (!c.alpha.empty() || !c.eta.empty()) {
    fail("algo", "retrace takes neither alpha nor eta");
  }
  require_nonempty(c.lambda, "lambda");
  require_in(c.lambda, "lambda", 0.0, 1.0);
}

struct GridPoint {
  AlgoParams params;
  std::optional<std::int64_t> n;
};

// Expands the algorithm grid in the fixed order sigma, lambda, alpha/eta, N, beta.
std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
  const std::vector<std::optional<double>> none{std::nullopt};
  auto as_opt = [&](const std::vector<double>& v) {
    if (v.empty()) return none;
    std::vector<std::optional<double>> out(v.begin(), v.end());
    return out;
  };
  const auto sigmas = as_opt(c.sigma);
  const auto rates = as_opt(uses_alpha(c.algo) ? c.alpha : c.eta);
  const auto betas = as_opt(c.beta);
  std::vector<std::optional<std::int64_t>> ns{std::nullopt};
  if (c.kind == ExperimentKind::kFrozenLakeControl) ns.assign(c.n.begin(), c.n.end());

  std::vector<GridPoint> grid;
  for (const auto& sigma : sigmas) {
    for (double lambda : c.lambda) {
      for (const auto& rate : rates) {
        for (const auto& n : ns) {
          for (const auto& beta : betas) {
            GridPoint g;
            g.params.gamma = c.gamma;
            g.params.lambda = lambda;
            g.params.sigma = sigma;
            g.params.beta = beta;
            if (uses_alpha(c.algo)) {
              g.params.alpha = rate.value_or(0.0);
            } else {
              g.params.eta = rate;
            }
            g.n = n;
            grid.push_back(g);
          }
        }
      }
    }
  }
  return grid;
}

std::string environment_label(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::kDpNoise: return c.env;
    case ExperimentKind::kNChainEval: return "nchain";
    case ExperimentKind::kFrozenLakeControl: return "frozenlake8x8";
    default: return "";
  }
}

ResultRow row_for(const ExperimentConfig& c, const GridPoint& g, std::int64_t trial) {
  ResultRow r;
  r.experiment = experiment_name(c.kind);
  r.env = environment_label(c);
  if (uses_alpha(c.algo)) r.alpha = g.params.alpha;
  r.lambda = g.params.lambda;
  r.eta = g.params.eta;
  r.beta = g.params.beta;
  r.sigma = g.params.sigma;
  r.n = g.n;
  r.trial = trial;
  return r;
}

std::vector<ResultRow> series_rows(const ResultRow& proto, const IterationSeries& series) {
  std::vector<ResultRow> rows;
  rows.reserve(series.records.size());
  for (const IterationRecord& rec : series.records) {
    ResultRow r = proto;
    r.step = rec.iteration;
    r.metric = series.metric;
    r.value = rec.value;
    rows.push_back(std::move(r));
  }
  return rows;
}

DpAlgo dp_algo(const std::string& algo) {
  if (algo == "retrace") return DpAlgo::kRetrace;
  if (algo == "retrace-lr") return DpAlgo::kRetraceLr;
  return DpAlgo::kGrape;
}

ModelFreeAlgo model_free_algo(const std::string& algo) {
  return algo == "grape" ? ModelFreeAlgo::kGrape : ModelFreeAlgo::kRetraceLr;
}

TabularMdp dp_env(const ExperimentConfig& c) {
  if (c.env == "frozenlake8x8") return frozenlake_mdp(c.gamma);
  if (c.env == "nchain") return nchain_mdp(c.slip, c.gamma);
  return two_state_mdp(c.gamma);
}

std::vector<ResultRow> run_task(const ExperimentConfig& c, const TabularMdp* mdp, const GridPoint& g,
                                std::int64_t trial) {
  const ResultRow proto = row_for(c, g, trial);
  Rng rng = substream(c.seed, static_cast<std::uint64_t>(trial));
  switch (c.kind) {
    case ExperimentKind::kDpNoise:
      return series_rows(proto, dp_noise_trial(*mdp, dp_algo(c.algo), g.params, c.iters, rng));
    case ExperimentKind::kNChainEval: {
      NChainEvalConfig cfg;
      cfg.env.slip_prob = c.slip;
      cfg.blocks = c.blocks;
      cfg.block_size = c.block_size;
      const Index s = cfg.env.n_states();
      const Policy pi = dirichlet_policy(rng, s, 2);
      const Policy mu = dirichlet_policy(rng, s, 2);
      return series_rows(proto, nchain_eval_run(cfg, pi, mu, model_free_algo(c.algo), g.params, rng));
    }
    case ExperimentKind::kFrozenLakeControl: {
      FrozenLakeControlConfig cfg;
      cfg.total_steps = c.steps;
      cfg.n = *g.n;
      cfg.policy_period = c.policy_period;
      cfg.buffer_capacity = static_cast<std::size_t>(c.buffer_capacity);
      return series_rows(proto, frozenlake_control_run(cfg, model_free_algo(c.algo), g.params, rng).success);
    }
    case ExperimentKind::kErrorDecay:
    case ExperimentKind::kVarianceLimit:
      break;
  }
  throw std::logic_error("run_task: kind has no per-trial runs");
}

std::vector<ResultRow> run_error_decay(const ExperimentConfig& c) {
  std::vector<ResultRow> rows;
  for (double alpha : c.alpha) {
    for (int k = 0; k < c.horizon; ++k) {
      ResultRow r;
      r.experiment = experiment_name(c.kind);
      r.alpha = alpha;
      r.step = k;
      r.metric = "coefficient";
      r.value = error_decay_coefficient(alpha, c.delta, c.horizon, k);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<ResultRow> run_variance_limit(const ExperimentConfig& c) {
  std::vector<std::vector<ResultRow>> per_alpha(c.alpha.size());
  parallel_for(c.alpha.size(), c.threads, [&](std::size_t i) {
    const double alpha = c.alpha[i];
    Rng rng = substream(c.seed, i);
    ResultRow base;
    base.experiment = experiment_name(c.kind);
    base.alpha = alpha;
    base.step = c.k;
    auto emit = [&](const char* metric, double value) {
      ResultRow r = base;
      r.metric = metric;
      r.value = value;
      per_alpha[i].push_back(std::move(r));
    };
    emit("variance_ratio", variance_ratio(alpha, c.k));
    emit("simulated_variance_ratio", simulated_variance_ratio(alpha, c.k, c.samples, rng));
    emit("limit", alpha < 1.0 ? (1.0 - alpha) / (1.0 + alpha) : 0.0);
  });
  std::vector<ResultRow> rows;
  for (auto& part : per_alpha) rows.insert(rows.end(), part.begin(), part.end());
  return rows;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) fail("trials", "must be at least 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must lie in [0, 1)");
  switch (kind) {
    case ExperimentKind::kDpNoise:
      if (env != "frozenlake8x8" && env != "nchain" && env != "two-state") {
        fail("env", fmt::format("unsupported value '{}'", env));
      }
      validate_algo_grid(*this, true);
      require_nonempty(sigma, "sigma");
      require_in(sigma, "sigma", 0.0, 1e300);
      if (iters < 0) fail("iters", "must be nonnegative");
      if (!(slip >= 0.0 && slip <= 0.5)) fail("slip", "must lie in [0, 0.5]");
      break;
    case ExperimentKind::kErrorDecay:
      require_nonempty(alpha, "alpha");
      require_in(alpha, "alpha", 0.0, 1.0);
      if (!(delta >= 0.0 && delta < 1.0)) fail("delta", "must lie in [0, 1)");
      if (horizon < 1) fail("K", "must be at least 1");
      break;
    case ExperimentKind::kVarianceLimit:
      require_nonempty(alpha, "alpha");
      require_in(alpha, "alpha", 0.0, 1.0);
      if (k < 1) fail("k", "must be at least 1");
      if (samples < 2) fail("samples", "must be at least 2");
      break;
    case ExperimentKind::kNChainEval:
      validate_algo_grid(*this, false);
      if (!(slip >= 0.0 && slip <= 0.5)) fail("slip", "must lie in [0, 0.5]");
      if (blocks < 0) fail("blocks", "must be nonnegative");
      if (block_size < 1) fail("block-size", "must be at least 1");
      break;
    case ExperimentKind::kFrozenLakeControl:
      validate_algo_grid(*this, false);
      require_nonempty(beta, "beta");
      require_in(beta, "beta", 0.0, 1e300, true);
      if (n.empty()) fail("N", "list must not be empty");
      for (std::int64_t v : n) {
        if (v < 1) fail("N", "entries must be positive");
      }
      if (policy_period < 1) fail("policy-period", "must be positive");
      if (steps < policy_period) fail("steps", "must be at least policy-period");
      if (buffer_capacity < 1) fail("buffer-capacity", "must be positive");
      break;
  }
}

std::size_t run_count(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::kErrorDecay: return 0;
    case ExperimentKind::kVarianceLimit: return cfg.alpha.size();
    default: return expand_grid(cfg).size() * static_cast<std::size_t>(cfg.trials);
  }
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            task(i);
          } catch (...) {
            // Report the failure of the lowest index so errors do not depend on scheduling.
            std::lock_guard lock(error_mutex);
            if (i < error_index) {
              error_index = i;
              error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ExperimentKind::kErrorDecay) return run_error_decay(cfg);
  if (cfg.kind == ExperimentKind::kVarianceLimit) return run_variance_limit(cfg);

  const std::vector<GridPoint> grid = expand_grid(cfg);
  std::optional<TabularMdp> mdp;
  if (cfg.kind == ExperimentKind::kDpNoise) mdp = dp_env(cfg);

  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<ResultRow>> parts(grid.size() * trials);
  parallel_for(parts.size(), cfg.threads, [&](std::size_t i) {
    parts[i] = run_task(cfg, mdp ? &*mdp : nullptr, grid[i / trials], static_cast<std::int64_t>(i % trials));
  });

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<ResultRow> rows;
  rows.reserve(total);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(rows));
  return rows;
}

ExperimentOutput run_and_summarize(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  out.rows = run_experiment(cfg);
  const std::vector<GroupKey> keys = all_group_keys();
  if (!out.rows.empty()) out.summary = aggregate(out.rows, keys);
  if (cfg.kind == ExperimentKind::kFrozenLakeControl) out.best_beta = select_best_beta(out.rows, cfg.beta);
  return out;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& output) {
  const std::string name = experiment_name(cfg.kind);
  std::filesystem::create_directories(cfg.out);
  std::vector<std::filesystem::path> written;

  const auto raw = cfg.out / (name + ".csv");
  write_csv_file(raw, output.rows);
  written.push_back(raw);

  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot open {} for writing", p.string()));
    return os;
  };

  const auto summary = cfg.out / (name + "_summary.csv");
  {
    std::ofstream os = open(summary);
    write_summary_csv(os, output.summary);
  }
  written.push_back(summary);

  if (cfg.kind == ExperimentKind::kFrozenLakeControl) {
    const auto best = cfg.out / (name + "_best_beta.csv");
    std::ofstream os = open(best);
    os << "experiment,alpha,eta,lambda,N,beta,score,final_mean\n";
    for (const BetaChoice& b : output.best_beta) {
      const ResultRow& k = b.key;
      os << fmt::format("{},{},{},{},{},{},{},{}\n", k.experiment, k.alpha ? format_real(*k.alpha) : "",
                        k.eta ? format_real(*k.eta) : "", k.lambda ? format_real(*k.lambda) : "",
                        k.n ? std::to_string(*k.n) : "", format_real(b.beta), format_real(b.score),
                        format_real(b.final_mean));
    }
    written.push_back(best);
  }
  return written;
}

}  // namespace grape
