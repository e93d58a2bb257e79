#include "grape/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace grape {

TabularMdp::TabularMdp(Index n_states, Index n_actions, Eigen::MatrixXd transition, Table reward,
                       std::vector<bool> terminal, double gamma, double r_max, Index start_state)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      terminal_(std::move(terminal)),
      gamma_(gamma),
      r_max_(r_max),
      start_state_(start_state) {
  if (n_states_ <= 0 || n_actions_ <= 0) {
    throw std::invalid_argument("MDP needs at least one state and one action");
  }
  if (transition_.rows() != n_pairs() || transition_.cols() != n_states_) {
    throw std::invalid_argument("transition matrix must be (S*A) x S");
  }
  if (reward_.rows() != n_states_ || reward_.cols() != n_actions_) {
    throw std::invalid_argument("reward table must be S x A");
  }
  if (static_cast<Index>(terminal_.size()) != n_states_) {
    throw std::invalid_argument("terminal flags must have one entry per state");
  }
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1)");
  }
  if (!(r_max_ > 0.0)) {
    throw std::invalid_argument("r_max must be positive");
  }
  if (start_state_ < 0 || start_state_ >= n_states_) {
    throw std::invalid_argument("start state out of range");
  }
  for (Index x = 0; x < n_states_; ++x) {
    for (Index a = 0; a < n_actions_; ++a) {
      const Index row = x * n_actions_ + a;
      if ((transition_.row(row).array() < 0.0).any()) {
        throw std::invalid_argument("negative transition probability at state " +
                                    std::to_string(x));
      }
      if (std::abs(transition_.row(row).sum() - 1.0) > kRowSumTolerance) {
        throw std::invalid_argument("transition row does not sum to 1 at state " +
                                    std::to_string(x) + ", action " + std::to_string(a));
      }
      if (std::abs(reward_(x, a)) > r_max_) {
        throw std::invalid_argument("|r(x,a)| exceeds r_max at state " + std::to_string(x));
      }
      if (is_terminal(x)) {
        if (transition_(row, x) != 1.0 || reward_(x, a) != 0.0) {
          throw std::invalid_argument("terminal state " + std::to_string(x) +
                                      " must self-loop with zero reward");
        }
      }
    }
  }

  continuation_ = transition_;
  for (Index x = 0; x < n_states_; ++x) {
    if (!is_terminal(x)) continue;
    continuation_.col(x).setZero();
    for (Index a = 0; a < n_actions_; ++a) continuation_.row(x * n_actions_ + a).setZero();
  }
}

TabularMdp TabularMdp::with_gamma(double gamma) const {
  return TabularMdp(n_states_, n_actions_, transition_, reward_, terminal_, gamma, r_max_,
                    start_state_);
}

void AlgoParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (eta && !(*eta > 0.0 && *eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (beta && !(*beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (sigma && !(*sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
}

double contraction_modulus(double gamma, double lambda) {
  return gamma * (1.0 - lambda * (1.0 - gamma));
}

double contraction_modulus(const AlgoParams& params) {
  return contraction_modulus(params.gamma, params.lambda);
}

TabularMdp two_state_mdp(double gamma) {
  // Actions: 0 = stay, 1 = swap.
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 2);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  p(2, 1) = 1.0;
  p(3, 0) = 1.0;
  Table r(2, 2);
  r << 1.0, 1.0, 0.0, 0.0;
  return TabularMdp(2, 2, std::move(p), std::move(r), {false, false}, gamma, 1.0);
}

TabularMdp single_state_mdp(double reward, double gamma) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(1, 1);
  Table r = Table::Constant(1, 1, reward);
  return TabularMdp(1, 1, std::move(p), std::move(r), {false}, gamma,
                    reward == 0.0 ? 1.0 : std::abs(reward));
}

TabularMdp random_mdp(Rng& rng, Index n_states, Index n_actions, double gamma,
                      double terminal_prob) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  std::vector<bool> terminal(static_cast<std::size_t>(n_states), false);
  for (Index x = 1; x < n_states; ++x) terminal[static_cast<std::size_t>(x)] = unit(rng) < terminal_prob;

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_states * n_actions, n_states);
  Table r = Table::Zero(n_states, n_actions);
  for (Index x = 0; x < n_states; ++x) {
    for (Index a = 0; a < n_actions; ++a) {
      const Index row = x * n_actions + a;
      if (terminal[static_cast<std::size_t>(x)]) {
        p(row, x) = 1.0;
        continue;
      }
      double sum = 0.0;
      for (Index y = 0; y < n_states; ++y) sum += (p(row, y) = expo(rng));
      p.row(row) /= sum;
      r(x, a) = reward_dist(rng);
    }
  }
  return TabularMdp(n_states, n_actions, std::move(p), std::move(r), std::move(terminal), gamma,
                    1.0);
}

Policy dirichlet_policy(Rng& rng, Index n_states, Index n_actions) {
  std::exponential_distribution<double> expo(1.0);
  Table probs(n_states, n_actions);
  for (Index x = 0; x < n_states; ++x) {
    double sum = 0.0;
    for (Index a = 0; a < n_actions; ++a) sum += (probs(x, a) = expo(rng));
    probs.row(x) /= sum;
  }
  return Policy(std::move(probs));
}

QTable gaussian_table(Rng& rng, Index n_states, Index n_actions, double stddev, double mean) {
  QTable q(n_states, n_actions);
  if (stddev == 0.0) {
    q.table().setConstant(mean);
    return q;
  }
  std::normal_distribution<double> normal(mean, stddev);
  for (Index x = 0; x < n_states; ++x) {
    for (Index a = 0; a < n_actions; ++a) q(x, a) = normal(rng);
  }
  return q;
}

}  // namespace grape
