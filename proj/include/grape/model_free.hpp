#pragma once

#include "grape/dp_lab.hpp"
#include "grape/envs.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace grape {

/// One sampled update target per transition of the slice it was computed on.
struct TargetBatch {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t t) const { return values[t]; }
};

/**
 * Backward recursion for sampled GRAPE targets over a trajectory slice.
 *
 *   rho_t = pi(a_t|x_t) / mu_t,  c_t = min(1, rho_t)
 *   T_t   = r_t + gamma (1 - d_t) (pi Psi)(x_{t+1})
 *   Phi_t = Psi(x_t, a_t) - (pi Psi)(x_t)
 *   b_t   = rho_t (T_t - Psi(x_t, a_t) + alpha Phi_t) + gamma lambda c_t (1 - d_t) b_{t+1}
 *   G_t   = T_t + alpha Phi_t + gamma lambda (1 - d_t) b_{t+1}
 *
 * with b past the slice end equal to zero. The residual of the step that ends
 * an episode is kept in b_t; only the continuation is cut. This makes
 * E[G_t] = (G Psi + alpha Phi)(x_t, a_t) exactly for episodes that finish
 * inside the slice.
 */
TargetBatch grape_targets(std::span<const Transition> traj, const QTable& psi, const Policy& pi,
                          const AlgoParams& params);

/**
 * Sampled Retrace targets, G_t = T_t + gamma lambda (1 - d_t) b_{t+1} with
 * b_t = c_t (T_t - Q(x_t, a_t) + gamma lambda (1 - d_t) b_{t+1}).
 * Their mean is (R Q)(x_t, a_t).
 */
TargetBatch retrace_targets(std::span<const Transition> traj, const QTable& q, const Policy& pi,
                            const AlgoParams& params);

/**
 * Replaces every visited (x, a) by the mean of its targets, or blends
 * eta * mean + (1 - eta) * old when eta is given. Unvisited entries keep
 * their old values.
 */
QTable table_update_from_targets(const QTable& table, std::span<const Transition> slice,
                                 const TargetBatch& targets, std::optional<double> eta = std::nullopt);

/// pi_{k+1}(a|x) proportional to pi_k(a|x) exp(beta adv(x, a)).
Policy trpo_softmax_update(const Policy& pi_k, const QTable& adv, double beta);

enum class ModelFreeAlgo { kGrape, kRetraceLr };

struct ControlState {
  QTable psi;
  Policy policy;
  AlgoParams params;
  std::int64_t steps = 0;
  std::int64_t value_updates = 0;
  std::int64_t policy_updates = 0;
  std::int64_t skipped_updates = 0;
};

/// Advantage estimate held by a table: (1 - alpha) Phi for GRAPE, Q - pi Q for Retrace-LR.
QTable advantage_estimate(ModelFreeAlgo algo, const QTable& table, const Policy& pi,
                          const AlgoParams& params);

struct NChainEvalConfig {
  NChainConfig env;
  int blocks = 800;
  int block_size = 250;
};

/**
 * Model-free policy evaluation on NChain. Each block collects block_size
 * steps under mu from a fresh reset (resetting again whenever an episode
 * ends), recomputes targets on that block, updates the table, and discards
 * the samples. Records error_k / error_0 for k = 0..blocks where
 * error_k = sum (A^pi - estimate_k)^2. Retrace-LR requires params.eta.
 */
IterationSeries nchain_eval_run(const NChainEvalConfig& config, const Policy& pi, const Policy& mu,
                                ModelFreeAlgo algo, const AlgoParams& params, Rng& rng);

struct FrozenLakeControlConfig {
  std::int64_t total_steps = 5'000'000;
  std::int64_t n = 250;
  std::int64_t policy_period = 100'000;
  std::size_t buffer_capacity = 500'000;
  bool slippery = true;
};

struct ControlResult {
  /// Goal-reaching probability of pi_0, pi_1, ...; total_steps / policy_period + 1 entries.
  IterationSeries success;
  ControlState state;
};

/**
 * Control on FrozenLake: act with the current policy, store its action
 * probability as mu, refit the table every n steps from n contiguous buffer
 * samples, and apply the softmax policy update every policy_period steps.
 * Needs params.beta, and params.eta for Retrace-LR. Updates attempted while
 * the buffer holds fewer than n samples are skipped and counted.
 */
ControlResult frozenlake_control_run(const FrozenLakeControlConfig& config, ModelFreeAlgo algo,
                                     const AlgoParams& params, Rng& rng);

}  // namespace grape
