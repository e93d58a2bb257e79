#include "grape/envs.hpp"

#include <string>

namespace grape {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::append(const Transition& t) {
  if (!(t.mu_a > 0.0)) throw std::invalid_argument("transition behavior probability must be positive");
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(t);
}

std::vector<Transition> ReplayBuffer::slice(std::size_t start, std::size_t n) const {
  if (start + n > entries_.size()) {
    throw InsufficientDataError("slice [" + std::to_string(start) + ", " +
                                std::to_string(start + n) + ") exceeds buffer size " +
                                std::to_string(entries_.size()));
  }
  const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(start);
  return {first, first + static_cast<std::ptrdiff_t>(n)};
}

std::vector<Transition> ReplayBuffer::contiguous(std::size_t n, Rng& rng) const {
  if (n == 0 || n > entries_.size()) {
    throw InsufficientDataError("requested " + std::to_string(n) + " contiguous samples from " +
                                std::to_string(entries_.size()));
  }
  std::uniform_int_distribution<std::size_t> start(0, entries_.size() - n);
  return slice(start(rng), n);
}

}  // namespace grape
