#include "grape/envs.hpp"

#include <algorithm>
#include <utility>

namespace grape {

namespace {

Index step_cell(Index state, Index direction) {
  Index row = state / FrozenLakeEnv::kSide;
  Index col = state % FrozenLakeEnv::kSide;
  switch (direction) {
    case kLeft: col = std::max<Index>(col - 1, 0); break;
    case kDown: row = std::min<Index>(row + 1, FrozenLakeEnv::kSide - 1); break;
    case kRight: col = std::min<Index>(col + 1, FrozenLakeEnv::kSide - 1); break;
    case kUp: row = std::max<Index>(row - 1, 0); break;
    default: throw std::invalid_argument("frozenlake: action must be in 0..3");
  }
  return row * FrozenLakeEnv::kSide + col;
}

bool terminal_cell(char c) { return c == 'H' || c == 'G'; }

}  // namespace

char FrozenLakeEnv::cell(Index state) {
  return kFrozenLake8x8[static_cast<std::size_t>(state / kSide)][static_cast<std::size_t>(state % kSide)];
}

Index FrozenLakeEnv::goal_state() { return kStates - 1; }
Index FrozenLakeEnv::start_state() { return 0; }

FrozenLakeEnv::FrozenLakeEnv(Rng rng, bool slippery)
    : rng_(std::move(rng)), slippery_(slippery), state_(start_state()) {}

Index FrozenLakeEnv::reset() {
  state_ = start_state();
  return state_;
}

bool FrozenLakeEnv::at_terminal() const { return terminal_cell(cell(state_)); }

StepResult FrozenLakeEnv::step(Index action) {
  if (at_terminal()) throw std::logic_error("frozenlake: step called in a terminal state");
  if (action < 0 || action >= kActions) throw std::invalid_argument("frozenlake: action must be in 0..3");
  Index direction = action;
  if (slippery_) {
    // Perpendicular directions are (a - 1) mod 4 and (a + 1) mod 4.
    const int pick = std::uniform_int_distribution<int>(0, 2)(rng_);
    direction = (action + pick + 3) % 4;
  }
  state_ = step_cell(state_, direction);
  StepResult out;
  out.next = state_;
  out.done = at_terminal();
  out.reward = cell(state_) == 'G' ? 1.0 : 0.0;
  return out;
}

TabularMdp frozenlake_mdp(double gamma, bool slippery) {
  constexpr Index n = FrozenLakeEnv::kStates;
  constexpr Index n_a = FrozenLakeEnv::kActions;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * n_a, n);
  Table r = Table::Zero(n, n_a);
  std::vector<bool> terminal(static_cast<std::size_t>(n), false);
  for (Index x = 0; x < n; ++x) terminal[static_cast<std::size_t>(x)] = terminal_cell(FrozenLakeEnv::cell(x));

  for (Index x = 0; x < n; ++x) {
    for (Index a = 0; a < n_a; ++a) {
      const Index row = x * n_a + a;
      if (terminal[static_cast<std::size_t>(x)]) {
        p(row, x) = 1.0;
        continue;
      }
      if (slippery) {
        for (Index offset : {Index{3}, Index{0}, Index{1}}) p(row, step_cell(x, (a + offset) % 4)) += 1.0 / 3.0;
      } else {
        p(row, step_cell(x, a)) = 1.0;
      }
      r(x, a) = p(row, FrozenLakeEnv::goal_state());
    }
  }
  return TabularMdp(n, n_a, std::move(p), std::move(r), std::move(terminal), gamma, 1.0,
                    FrozenLakeEnv::start_state());
}

}  // namespace grape
