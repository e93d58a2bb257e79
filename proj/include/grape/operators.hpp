#pragma once

#include "grape/mdp.hpp"

#include <stdexcept>

namespace grape {

/// mu(a|x) = 0 while pi(a|x) > 0 and the trace needs rho there.
class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/**
 * Exact policy-evaluation operators for a fixed (MDP, pi, mu, lambda).
 *
 * Construction builds the dense (S*A) x (S*A) matrices P^pi and P^{c mu} and
 * factors (I - gamma lambda P^{c mu}) once, so repeated applications cost one
 * matrix-vector product and one triangular solve each. The infinite trace sums
 * are evaluated in closed form through that factorization.
 *
 * All operators bootstrap through MDP::continuation(), i.e. the value of a
 * terminal successor is taken as zero and terminal rows reduce to r(x, a).
 */
class ExactOperators {
 public:
  ExactOperators(const TabularMdp& mdp, const Policy& pi, const Policy& mu, double lambda,
                 TraceChoice trace = TraceChoice::kRetrace);

  /// T^pi Q = r + gamma P^pi Q.
  QTable bellman(const QTable& q) const;
  /// P^{c mu} Q.
  QTable pcmu(const QTable& q) const;
  /// P^pi Q.
  QTable ppi(const QTable& q) const;
  /// R Q = Q + (I - gamma lambda P^{c mu})^{-1} (T^pi Q - Q).
  QTable retrace(const QTable& q) const;
  /// G Q = T^pi Q + gamma lambda (I - gamma lambda P^{c mu})^{-1} P^pi (T^pi Q - Q).
  QTable grape(const QTable& q) const;
  /// Linear part of G: H Q = gamma P^pi Q + gamma lambda (I - gamma lambda P^{c mu})^{-1} P^pi (gamma P^pi - I) Q.
  QTable h(const QTable& q) const;

  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }

  const Eigen::MatrixXd& ppi_matrix() const { return p_pi_; }
  const Eigen::MatrixXd& pcmu_matrix() const { return p_cmu_; }

 private:
  Eigen::VectorXd trace_solve(const Eigen::VectorXd& rhs) const;
  QTable wrap(const Eigen::VectorXd& flat) const;
  void check(const QTable& q) const;

  Index n_states_;
  Index n_actions_;
  double gamma_;
  double lambda_;
  Eigen::VectorXd reward_;
  Eigen::MatrixXd p_pi_;
  Eigen::MatrixXd p_cmu_;
  Eigen::PartialPivLU<Eigen::MatrixXd> trace_lu_;
};

/// (S*A) x (S*A) matrix of P(y|x,a) w(y,b) over the continuation kernel.
Eigen::MatrixXd state_action_kernel(const TabularMdp& mdp, const Table& weights);

/// Per-(y, b) weights mu(b|y) c0(y, b) for the chosen trace.
Table trace_weights(const Policy& pi, const Policy& mu, TraceChoice trace);

QTable bellman_apply(const TabularMdp& mdp, const Policy& pi, const QTable& q);
QTable pcmu_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, TraceChoice trace,
                  const QTable& q);
QTable retrace_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, double lambda,
                     const QTable& q);
QTable grape_operator_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                            double lambda, const QTable& q);
QTable h_operator_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, double lambda,
                        const QTable& q);

/// Q^pi by a dense solve of (I - gamma P^pi) Q = r. Residual is checked to 1e-10.
QTable exact_q_value(const TabularMdp& mdp, const Policy& pi);

}  // namespace grape
