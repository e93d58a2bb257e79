#include "grape/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grape {

namespace {

void require_shapes(const TabularMdp& mdp, const Policy& p, const char* name) {
  if (p.n_states() != mdp.n_states() || p.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument(std::string(name) + " shape does not match the MDP");
  }
}

}  // namespace

Eigen::MatrixXd state_action_kernel(const TabularMdp& mdp, const Table& weights) {
  const Index s = mdp.n_states();
  const Index a_n = mdp.n_actions();
  const Eigen::MatrixXd& cont = mdp.continuation();
  Eigen::MatrixXd k(mdp.n_pairs(), mdp.n_pairs());
  for (Index y = 0; y < s; ++y) {
    for (Index b = 0; b < a_n; ++b) k.col(y * a_n + b) = cont.col(y) * weights(y, b);
  }
  return k;
}

Table trace_weights(const Policy& pi, const Policy& mu, TraceChoice trace) {
  if (pi.n_states() != mu.n_states() || pi.n_actions() != mu.n_actions()) {
    throw std::invalid_argument("target and behavior policy shapes differ");
  }
  Table w(pi.n_states(), pi.n_actions());
  for (Index y = 0; y < pi.n_states(); ++y) {
    for (Index b = 0; b < pi.n_actions(); ++b) {
      const double p = pi(y, b);
      const double m = mu(y, b);
      if (trace == TraceChoice::kTreeBackup) {
        w(y, b) = m * p;
        continue;
      }
      if (m == 0.0) {
        if (p > 0.0) {
          throw UndefinedRatioError("importance ratio undefined at state " + std::to_string(y) +
                                    ", action " + std::to_string(b));
        }
        w(y, b) = 0.0;
        continue;
      }
      const double rho = p / m;
      const double c = trace == TraceChoice::kRetrace ? std::min(1.0, rho) : rho;
      w(y, b) = m * c;
    }
  }
  return w;
}

ExactOperators::ExactOperators(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                               double lambda, TraceChoice trace)
    : n_states_(mdp.n_states()),
      n_actions_(mdp.n_actions()),
      gamma_(mdp.gamma()),
      lambda_(lambda) {
  require_shapes(mdp, pi, "target policy");
  require_shapes(mdp, mu, "behavior policy");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");

  reward_ = Eigen::Map<const Eigen::VectorXd>(mdp.reward_table().data(), mdp.n_pairs());
  p_pi_ = state_action_kernel(mdp, pi.table());
  p_cmu_ = state_action_kernel(mdp, trace_weights(pi, mu, trace));

  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(mdp.n_pairs(), mdp.n_pairs()) - gamma_ * lambda_ * p_cmu_;
  trace_lu_.compute(system);
}

void ExactOperators::check(const QTable& q) const {
  if (q.n_states() != n_states_ || q.n_actions() != n_actions_) {
    throw std::invalid_argument("QTable shape does not match the operator");
  }
}

QTable ExactOperators::wrap(const Eigen::VectorXd& flat) const {
  if (!flat.allFinite()) {
    throw std::runtime_error("operator produced non-finite values (ill-conditioned trace system)");
  }
  return QTable::from_flat(flat, n_actions_);
}

Eigen::VectorXd ExactOperators::trace_solve(const Eigen::VectorXd& rhs) const {
  return trace_lu_.solve(rhs);
}

QTable ExactOperators::bellman(const QTable& q) const {
  check(q);
  return wrap(reward_ + gamma_ * (p_pi_ * q.flat()));
}

QTable ExactOperators::pcmu(const QTable& q) const {
  check(q);
  return wrap(p_cmu_ * q.flat());
}

QTable ExactOperators::ppi(const QTable& q) const {
  check(q);
  return wrap(p_pi_ * q.flat());
}

QTable ExactOperators::retrace(const QTable& q) const {
  check(q);
  const Eigen::VectorXd flat = q.flat();
  if (lambda_ == 0.0) return wrap(reward_ + gamma_ * (p_pi_ * flat));
  const Eigen::VectorXd residual = reward_ + gamma_ * (p_pi_ * flat) - flat;
  return wrap(flat + trace_solve(residual));
}

QTable ExactOperators::grape(const QTable& q) const {
  check(q);
  const Eigen::VectorXd flat = q.flat();
  const Eigen::VectorXd tq = reward_ + gamma_ * (p_pi_ * flat);
  if (lambda_ == 0.0) return wrap(tq);
  const Eigen::VectorXd correction = trace_solve(p_pi_ * (tq - flat));
  return wrap(tq + gamma_ * lambda_ * correction);
}

QTable ExactOperators::h(const QTable& q) const {
  check(q);
  const Eigen::VectorXd flat = q.flat();
  const Eigen::VectorXd pq = p_pi_ * flat;
  if (lambda_ == 0.0) return wrap(gamma_ * pq);
  const Eigen::VectorXd correction = trace_solve(p_pi_ * (gamma_ * pq - flat));
  return wrap(gamma_ * pq + gamma_ * lambda_ * correction);
}

QTable bellman_apply(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
  require_shapes(mdp, pi, "target policy");
  if (q.n_states() != mdp.n_states() || q.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("QTable shape does not match the MDP");
  }
  const Eigen::VectorXd next = mdp.continuation() * pi.expect(q).vector();
  QTable out(mdp.reward_table());
  out.table() += mdp.gamma() * Eigen::Map<const Table>(next.data(), mdp.n_states(), mdp.n_actions());
  return out;
}

QTable pcmu_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, TraceChoice trace,
                  const QTable& q) {
  return ExactOperators(mdp, pi, mu, 0.0, trace).pcmu(q);
}

QTable retrace_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, double lambda,
                     const QTable& q) {
  return ExactOperators(mdp, pi, mu, lambda).retrace(q);
}

QTable grape_operator_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                            double lambda, const QTable& q) {
  return ExactOperators(mdp, pi, mu, lambda).grape(q);
}

QTable h_operator_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu, double lambda,
                        const QTable& q) {
  return ExactOperators(mdp, pi, mu, lambda).h(q);
}

QTable exact_q_value(const TabularMdp& mdp, const Policy& pi) {
  require_shapes(mdp, pi, "target policy");
  const Eigen::MatrixXd p_pi = state_action_kernel(mdp, pi.table());
  const Eigen::Map<const Eigen::VectorXd> r(mdp.reward_table().data(), mdp.n_pairs());
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(mdp.n_pairs(), mdp.n_pairs()) - mdp.gamma() * p_pi;
  const Eigen::VectorXd q = system.partialPivLu().solve(r.eval());
  if (!q.allFinite()) throw std::runtime_error("exact_q_value: linear solve failed");
  const double residual = (q - (r + mdp.gamma() * (p_pi * q))).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("exact_q_value: residual " + std::to_string(residual) +
                             " exceeds tolerance");
  }
  return QTable::from_flat(q, mdp.n_actions());
}

}  // namespace grape
