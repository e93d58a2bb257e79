#include "grape/metrics.hpp"

#include "grape/operators.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace grape {

QTable advantage_of(const QTable& q, const Policy& pi) { return pi.center(q); }

double mean_squared_gap(const QTable& a, const QTable& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("QTable shape mismatch");
  return (a.table() - b.table()).squaredNorm() / static_cast<double>(a.size());
}

double nrmse(const QTable& a_true, const QTable& a_est, double e0) {
  if (!(e0 > 0.0)) throw std::invalid_argument("nrmse: e0 must be positive");
  return mean_squared_gap(a_true, a_est) / e0;
}

VTable absorption_probabilities(const TabularMdp& mdp, const Policy& pi,
                                std::span<const Index> goal) {
  const Index n = mdp.n_states();
  if (pi.n_states() != n || pi.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("policy shape does not match the MDP");
  }
  std::vector<bool> is_goal(static_cast<std::size_t>(n), false);
  for (Index g : goal) {
    if (g < 0 || g >= n) throw std::invalid_argument("goal state out of range");
    if (!mdp.is_terminal(g)) {
      throw std::invalid_argument("goal state " + std::to_string(g) + " is not terminal");
    }
    is_goal[static_cast<std::size_t>(g)] = true;
  }

  // State-to-state chain under pi.
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    for (Index a = 0; a < mdp.n_actions(); ++a) {
      chain.row(x) += pi(x, a) * mdp.transition_matrix().row(x * mdp.n_actions() + a);
    }
  }

  // States from which the goal is reachable; everything else has probability 0.
  std::vector<bool> reaches(static_cast<std::size_t>(n), false);
  std::deque<Index> frontier;
  for (Index g = 0; g < n; ++g) {
    if (is_goal[static_cast<std::size_t>(g)]) {
      reaches[static_cast<std::size_t>(g)] = true;
      frontier.push_back(g);
    }
  }
  while (!frontier.empty()) {
    const Index y = frontier.front();
    frontier.pop_front();
    for (Index x = 0; x < n; ++x) {
      if (reaches[static_cast<std::size_t>(x)] || mdp.is_terminal(x) || chain(x, y) <= 0.0) continue;
      reaches[static_cast<std::size_t>(x)] = true;
      frontier.push_back(x);
    }
  }

  std::vector<Index> transient;
  for (Index x = 0; x < n; ++x) {
    if (reaches[static_cast<std::size_t>(x)] && !mdp.is_terminal(x)) transient.push_back(x);
  }

  VTable out(n, 0.0);
  for (Index g : goal) out(g) = 1.0;
  const Index m = static_cast<Index>(transient.size());
  if (m == 0) return out;

  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (Index i = 0; i < m; ++i) {
    const Index x = transient[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m; ++j) system(i, j) -= chain(x, transient[static_cast<std::size_t>(j)]);
    for (Index g : goal) rhs(i) += chain(x, g);
  }
  const Eigen::VectorXd p = system.partialPivLu().solve(rhs);
  if (!p.allFinite()) {
    throw std::runtime_error("absorption probabilities: chain is not absorbing");
  }
  for (Index i = 0; i < m; ++i) {
    out(transient[static_cast<std::size_t>(i)]) = std::clamp(p(i), 0.0, 1.0);
  }
  return out;
}

double policy_success_probability(const TabularMdp& mdp, const Policy& pi,
                                  std::span<const Index> goal) {
  return absorption_probabilities(mdp, pi, goal)(mdp.start_state());
}

double kl_max(const Policy& pi, const Policy& pi_old) {
  if (pi.n_states() != pi_old.n_states() || pi.n_actions() != pi_old.n_actions()) {
    throw std::invalid_argument("kl_max: policy shapes differ");
  }
  double worst = 0.0;
  for (Index x = 0; x < pi.n_states(); ++x) {
    double kl = 0.0;
    for (Index a = 0; a < pi.n_actions(); ++a) {
      const double p = pi(x, a);
      if (p == 0.0) continue;
      const double q = pi_old(x, a);
      if (q == 0.0) {
        throw InfiniteDivergenceError("kl_max: pi is not absolutely continuous w.r.t. pi_old at state " +
                                      std::to_string(x));
      }
      kl += p * std::log(p / q);
    }
    worst = std::max(worst, kl);
  }
  return worst;
}

BoundSides reuse_bound_sides(const TabularMdp& mdp, const Policy& pi, const Policy& pi_old,
                             const QTable& psi0) {
  const double d = kl_max(pi, pi_old);
  const VTable v_pi = pi.expect(exact_q_value(mdp, pi));
  const VTable v_old = pi_old.expect(exact_q_value(mdp, pi_old));

  BoundSides sides;
  sides.lhs = sup_distance(v_pi, pi.expect(psi0));
  const double root_d = std::sqrt(d);
  sides.rhs = std::sqrt(2.0) * mdp.v_max() * root_d / (1.0 - mdp.gamma()) +
              std::sqrt(2.0) * root_d * psi0.sup_norm() + sup_distance(v_old, pi_old.expect(psi0));
  return sides;
}

}  // namespace grape
