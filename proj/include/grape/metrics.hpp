#pragma once

#include "grape/mdp.hpp"

#include <span>
#include <stdexcept>
#include <utility>

namespace grape {

class InfiniteDivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A(x, a) = Q(x, a) - sum_b pi(b|x) Q(x, b).
QTable advantage_of(const QTable& q, const Policy& pi);

/// Mean over (x, a) of (a - b)^2.
double mean_squared_gap(const QTable& a, const QTable& b);

/**
 * Normalized advantage error e_K / e_0 with e_K the mean squared gap between
 * the true and estimated advantages. This is a ratio of mean squared errors;
 * no square root is taken.
 */
double nrmse(const QTable& a_true, const QTable& a_est, double e0);

/**
 * Probability of being absorbed in `goal` when starting from the MDP start
 * state and following pi, undiscounted. Goal states must be terminal.
 */
double policy_success_probability(const TabularMdp& mdp, const Policy& pi,
                                  std::span<const Index> goal);

/// Same, for every state.
VTable absorption_probabilities(const TabularMdp& mdp, const Policy& pi,
                                std::span<const Index> goal);

/// max_x KL(pi(.|x) || pi_old(.|x)), with 0 log(0/q) = 0.
double kl_max(const Policy& pi, const Policy& pi_old);

struct BoundSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/**
 * Both sides of the initialization-reuse inequality
 *   ||V^pi - pi Psi0|| <= sqrt(2) V_max sqrt(D) / (1 - gamma) + sqrt(2) sqrt(D) ||Psi0||
 *                         + ||V^pi_old - pi_old Psi0||
 * where D = kl_max(pi, pi_old).
 */
BoundSides reuse_bound_sides(const TabularMdp& mdp, const Policy& pi, const Policy& pi_old,
                             const QTable& psi0);

}  // namespace grape
