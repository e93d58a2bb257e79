#pragma once

#include "grape/mdp.hpp"
#include "grape/random.hpp"

#include <array>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace grape {

/// One experience tuple. `mu_a` is the behavior probability of `a` at
/// collection time, so later policy changes cannot alter stored ratios.
struct Transition {
  Index x = 0;
  Index a = 0;
  double r = 0.0;
  Index y = 0;
  double mu_a = 1.0;
  bool d = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct StepResult {
  Index next = 0;
  double reward = 0.0;
  bool done = false;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bounded FIFO experience store. Appending to a full buffer evicts the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void append(const Transition& t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  const Transition& operator[](std::size_t i) const { return entries_[i]; }

  /// Entries [start, start + n) in insertion order.
  std::vector<Transition> slice(std::size_t start, std::size_t n) const;

  /// Uniformly random run of `n` consecutive entries. May cross episode boundaries.
  std::vector<Transition> contiguous(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> entries_;
};

inline constexpr Index kNChainLeft = 0;
inline constexpr Index kNChainRight = 1;

struct NChainConfig {
  Index n_interior = 20;
  double slip_prob = 0.0;
  double goal_reward = 1.0;
  /// Interior start state; nullopt draws a uniformly random interior state on reset.
  std::optional<Index> start_state = Index{10};

  void validate() const;
  Index n_states() const { return n_interior + 2; }
  Index goal_state() const { return n_interior + 1; }
};

/**
 * Linear chain with interior states 1..n_interior and terminal ends 0 and
 * n_interior + 1. Moving succeeds with probability 1 - slip and goes the
 * other way otherwise. Entering the right end pays goal_reward.
 */
class NChainEnv {
 public:
  NChainEnv(NChainConfig config, Rng rng);

  Index reset();
  StepResult step(Index action);

  Index state() const { return state_; }
  bool at_terminal() const;
  const NChainConfig& config() const { return config_; }

 private:
  NChainConfig config_;
  Rng rng_;
  Index state_;
};

/// Exact model of NChainEnv.
TabularMdp nchain_mdp(const NChainConfig& config, double gamma = 0.99);
TabularMdp nchain_mdp(double slip_prob, double gamma = 0.99);

inline constexpr Index kLeft = 0;
inline constexpr Index kDown = 1;
inline constexpr Index kRight = 2;
inline constexpr Index kUp = 3;

/// Canonical 8x8 layout, rows top to bottom.
inline constexpr std::array<std::string_view, 8> kFrozenLake8x8 = {
    "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
    "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG",
};

/**
 * Grid world over kFrozenLake8x8. State = row * 8 + col. H and G are
 * terminal; entering G pays 1. When slippery, the agent moves in the intended
 * direction or either perpendicular direction with probability 1/3 each;
 * moves off the grid leave the position unchanged.
 */
class FrozenLakeEnv {
 public:
  explicit FrozenLakeEnv(Rng rng, bool slippery = true);

  Index reset();
  StepResult step(Index action);

  Index state() const { return state_; }
  bool at_terminal() const;

  static constexpr Index kSide = 8;
  static constexpr Index kStates = kSide * kSide;
  static constexpr Index kActions = 4;
  static char cell(Index state);
  static Index goal_state();
  static Index start_state();

 private:
  Rng rng_;
  bool slippery_;
  Index state_;
};

/// Exact model of FrozenLakeEnv.
TabularMdp frozenlake_mdp(double gamma = 0.99, bool slippery = true);

}  // namespace grape
