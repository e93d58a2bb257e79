#pragma once

#include "grape/random.hpp"
#include "grape/tables.hpp"

#include <optional>
#include <vector>

namespace grape {

/**
 * Finite discounted MDP.
 *
 * The transition tensor is stored as an (S*A) x S matrix whose row x*A + a is
 * P(.|x, a). Terminal states are absorbing: they self-loop with zero reward.
 * Operators never bootstrap through a terminal state; see continuation().
 */
class TabularMdp {
 public:
  TabularMdp(Index n_states, Index n_actions, Eigen::MatrixXd transition, Table reward,
             std::vector<bool> terminal, double gamma, double r_max, Index start_state = 0);

  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }
  Index n_pairs() const { return n_states_ * n_actions_; }

  double transition(Index x, Index a, Index y) const { return transition_(x * n_actions_ + a, y); }
  const Eigen::MatrixXd& transition_matrix() const { return transition_; }

  /// Transition matrix with rows of terminal states and columns into terminal
  /// states zeroed: the kernel that carries value forward.
  const Eigen::MatrixXd& continuation() const { return continuation_; }

  double reward(Index x, Index a) const { return reward_(x, a); }
  const Table& reward_table() const { return reward_; }

  bool is_terminal(Index x) const { return terminal_[static_cast<std::size_t>(x)]; }
  const std::vector<bool>& terminal_flags() const { return terminal_; }

  double gamma() const { return gamma_; }
  double r_max() const { return r_max_; }
  double v_max() const { return r_max_ / (1.0 - gamma_); }
  Index start_state() const { return start_state_; }

  /// Same MDP with a different discount.
  TabularMdp with_gamma(double gamma) const;

 private:
  Index n_states_;
  Index n_actions_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd continuation_;
  Table reward_;
  std::vector<bool> terminal_;
  double gamma_;
  double r_max_;
  Index start_state_;
};

/// Trace coefficient c0(x, a) used by the off-policy correction P^{c0 mu}.
enum class TraceChoice {
  kRetrace,     ///< min{1, rho}
  kImportance,  ///< rho
  kTreeBackup,  ///< pi(a|x)
};

struct AlgoParams {
  double alpha = 0.0;
  double lambda = 0.0;
  double gamma = 0.99;
  std::optional<double> eta;
  std::optional<double> beta;
  std::optional<double> sigma;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// delta = gamma (1 - lambda (1 - gamma)), the worst-case GRAPE modulus.
double contraction_modulus(const AlgoParams& params);
double contraction_modulus(double gamma, double lambda);

/// Two states, actions {stay, swap}; r(0, .) = 1, r(1, .) = 0.
TabularMdp two_state_mdp(double gamma = 0.5);

/// One state, one action, reward `reward` on every step.
TabularMdp single_state_mdp(double reward, double gamma);

/**
 * Random MDP for property tests: Dirichlet(1) transition rows, uniform rewards
 * in [-1, 1], and each state terminal with probability `terminal_prob`
 * (state 0 is never terminal).
 */
TabularMdp random_mdp(Rng& rng, Index n_states, Index n_actions, double gamma,
                      double terminal_prob = 0.0);

/// Rows sampled from a flat Dirichlet (normalized unit exponentials).
Policy dirichlet_policy(Rng& rng, Index n_states, Index n_actions);

/// Table of i.i.d. N(mean, stddev) entries.
QTable gaussian_table(Rng& rng, Index n_states, Index n_actions, double stddev,
                      double mean = 0.0);

}  // namespace grape
