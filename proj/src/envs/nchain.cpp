#include "grape/envs.hpp"

#include <string>
#include <utility>

namespace grape {

void NChainConfig::validate() const {
  if (n_interior < 1) throw std::invalid_argument("nchain: n_interior must be at least 1");
  if (!(slip_prob >= 0.0 && slip_prob <= 0.5)) {
    throw std::invalid_argument("nchain: slip_prob must lie in [0, 0.5]");
  }
  if (!(goal_reward > 0.0)) throw std::invalid_argument("nchain: goal_reward must be positive");
  if (start_state && (*start_state < 1 || *start_state > n_interior)) {
    throw std::invalid_argument("nchain: start state must be an interior state");
  }
}

NChainEnv::NChainEnv(NChainConfig config, Rng rng)
    : config_(std::move(config)), rng_(std::move(rng)), state_(0) {
  config_.validate();
  reset();
}

Index NChainEnv::reset() {
  if (config_.start_state) {
    state_ = *config_.start_state;
  } else {
    state_ = std::uniform_int_distribution<Index>(1, config_.n_interior)(rng_);
  }
  return state_;
}

bool NChainEnv::at_terminal() const { return state_ == 0 || state_ == config_.goal_state(); }

StepResult NChainEnv::step(Index action) {
  if (at_terminal()) throw std::logic_error("nchain: step called in a terminal state");
  if (action != kNChainLeft && action != kNChainRight) {
    throw std::invalid_argument("nchain: action must be 0 (left) or 1 (right)");
  }
  const bool slipped = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.slip_prob;
  const bool go_right = (action == kNChainRight) != slipped;
  state_ += go_right ? 1 : -1;
  StepResult out;
  out.next = state_;
  out.done = at_terminal();
  out.reward = state_ == config_.goal_state() ? config_.goal_reward : 0.0;
  return out;
}

TabularMdp nchain_mdp(const NChainConfig& config, double gamma) {
  config.validate();
  const Index n = config.n_states();
  const Index goal = config.goal_state();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * 2, n);
  Table r = Table::Zero(n, 2);
  std::vector<bool> terminal(static_cast<std::size_t>(n), false);
  terminal.front() = true;
  terminal.back() = true;

  for (Index x = 0; x < n; ++x) {
    for (Index a = 0; a < 2; ++a) {
      const Index row = x * 2 + a;
      if (terminal[static_cast<std::size_t>(x)]) {
        p(row, x) = 1.0;
        continue;
      }
      const Index intended = a == kNChainRight ? x + 1 : x - 1;
      const Index reversed = a == kNChainRight ? x - 1 : x + 1;
      p(row, intended) += 1.0 - config.slip_prob;
      p(row, reversed) += config.slip_prob;
      r(x, a) = p(row, goal) * config.goal_reward;
    }
  }
  return TabularMdp(n, 2, std::move(p), std::move(r), std::move(terminal), gamma,
                    config.goal_reward, config.start_state.value_or(n / 2));
}

TabularMdp nchain_mdp(double slip_prob, double gamma) {
  NChainConfig config;
  config.slip_prob = slip_prob;
  return nchain_mdp(config, gamma);
}

}  // namespace grape
