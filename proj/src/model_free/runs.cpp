#include "grape/model_free.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace grape {

namespace {

std::span<const double> row_of(const Policy& pi, Index x) {
  return {pi.table().row(x).data(), static_cast<std::size_t>(pi.n_actions())};
}

void require_algo_params(ModelFreeAlgo algo, const AlgoParams& params) {
  params.validate();
  if (algo == ModelFreeAlgo::kRetraceLr && !params.eta) {
    throw std::invalid_argument("retrace-lr requires eta");
  }
}

QTable refit(ModelFreeAlgo algo, const QTable& table, std::span<const Transition> slice,
             const Policy& pi, const AlgoParams& params) {
  if (algo == ModelFreeAlgo::kGrape) {
    return table_update_from_targets(table, slice, grape_targets(slice, table, pi, params));
  }
  return table_update_from_targets(table, slice, retrace_targets(slice, table, pi, params), params.eta);
}

double squared_error(const QTable& a, const QTable& b) {
  return (a.table() - b.table()).squaredNorm();
}

}  // namespace

IterationSeries nchain_eval_run(const NChainEvalConfig& config, const Policy& pi, const Policy& mu,
                                ModelFreeAlgo algo, const AlgoParams& params, Rng& rng) {
  require_algo_params(algo, params);
  if (config.blocks < 0 || config.block_size < 1) throw std::invalid_argument("invalid block layout");
  const TabularMdp model = nchain_mdp(config.env, params.gamma);
  if (pi.n_states() != model.n_states() || mu.n_states() != model.n_states() ||
      pi.n_actions() != 2 || mu.n_actions() != 2) {
    throw std::invalid_argument("policies do not match the NChain layout");
  }
  const QTable a_true = advantage_of(exact_q_value(model, pi), pi);
  NChainEnv env(config.env, Rng(rng()));

  QTable table(model.n_states(), 2, 0.0);
  const double error0 = squared_error(a_true, advantage_estimate(algo, table, pi, params));
  if (!(error0 > 0.0)) throw std::runtime_error("true advantage is identically zero");

  IterationSeries series;
  series.params = params;
  series.metric = "error_ratio";
  series.records.reserve(static_cast<std::size_t>(config.blocks) + 1);
  series.records.push_back({0, 1.0});

  std::vector<Transition> block;
  block.reserve(static_cast<std::size_t>(config.block_size));
  for (int k = 0; k < config.blocks; ++k) {
    block.clear();
    Index x = env.reset();
    for (int t = 0; t < config.block_size; ++t) {
      const Index a = static_cast<Index>(sample_index(rng, row_of(mu, x)));
      const StepResult step = env.step(a);
      block.push_back({x, a, step.reward, step.next, mu(x, a), step.done});
      x = step.done ? env.reset() : step.next;
    }
    table = refit(algo, table, block, pi, params);
    const double error = squared_error(a_true, advantage_estimate(algo, table, pi, params));
    series.records.push_back({k + 1, error / error0});
  }
  return series;
}

ControlResult frozenlake_control_run(const FrozenLakeControlConfig& config, ModelFreeAlgo algo,
                                     const AlgoParams& params, Rng& rng) {
  require_algo_params(algo, params);
  if (!params.beta) throw std::invalid_argument("control requires beta");
  if (config.n < 1) throw std::invalid_argument("N must be positive");
  if (config.policy_period < 1 || config.total_steps < config.policy_period) {
    throw std::invalid_argument("total_steps must be at least policy_period");
  }
  if (config.buffer_capacity < 1) throw std::invalid_argument("buffer capacity must be positive");

  const TabularMdp model = frozenlake_mdp(params.gamma, config.slippery);
  const std::array<Index, 1> goal{FrozenLakeEnv::goal_state()};
  FrozenLakeEnv env(Rng(rng()), config.slippery);
  ReplayBuffer buffer(config.buffer_capacity);

  ControlResult result;
  ControlState& state = result.state;
  state.psi = QTable(FrozenLakeEnv::kStates, FrozenLakeEnv::kActions, 0.0);
  state.policy = Policy::uniform(FrozenLakeEnv::kStates, FrozenLakeEnv::kActions);
  state.params = params;

  IterationSeries& series = result.success;
  series.params = params;
  series.metric = "success_probability";
  series.records.push_back({0, policy_success_probability(model, state.policy, goal)});

  Index x = env.reset();
  for (std::int64_t t = 0; t < config.total_steps; ++t) {
    const Index a = static_cast<Index>(sample_index(rng, row_of(state.policy, x)));
    const StepResult step = env.step(a);
    buffer.append({x, a, step.reward, step.next, state.policy(x, a), step.done});
    state.steps = t + 1;

    if ((t + 1) % config.n == 0) {
      if (buffer.size() < static_cast<std::size_t>(config.n)) {
        ++state.skipped_updates;
      } else {
        const std::vector<Transition> slice = buffer.contiguous(static_cast<std::size_t>(config.n), rng);
        state.psi = refit(algo, state.psi, slice, state.policy, params);
        ++state.value_updates;
      }
    }

    if ((t + 1) % config.policy_period == 0) {
      state.policy = trpo_softmax_update(state.policy, advantage_estimate(algo, state.psi, state.policy, params),
                                         *params.beta);
      ++state.policy_updates;
      series.records.push_back({state.policy_updates, policy_success_probability(model, state.policy, goal)});
    }

    x = step.done ? env.reset() : step.next;
  }
  return result;
}

}  // namespace grape
