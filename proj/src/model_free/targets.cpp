#include "grape/model_free.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace grape {

namespace {

void check_transition(const Transition& tr, const QTable& table) {
  if (!(tr.mu_a > 0.0)) throw std::invalid_argument("transition has nonpositive behavior probability");
  if (tr.x < 0 || tr.x >= table.n_states() || tr.y < 0 || tr.y >= table.n_states() || tr.a < 0 ||
      tr.a >= table.n_actions()) {
    throw std::out_of_range("transition indices outside the table");
  }
}

void check_shapes(const QTable& table, const Policy& pi) {
  if (table.n_states() != pi.n_states() || table.n_actions() != pi.n_actions()) {
    throw std::invalid_argument("table and policy shapes differ");
  }
}

}  // namespace

TargetBatch grape_targets(std::span<const Transition> traj, const QTable& psi, const Policy& pi,
                          const AlgoParams& params) {
  params.validate();
  check_shapes(psi, pi);
  const VTable v = pi.expect(psi);
  const double gl = params.gamma * params.lambda;

  TargetBatch out;
  out.values.resize(traj.size());
  double b_next = 0.0;
  for (std::size_t i = traj.size(); i-- > 0;) {
    const Transition& tr = traj[i];
    check_transition(tr, psi);
    const double rho = pi(tr.x, tr.a) / tr.mu_a;
    const double c = std::min(1.0, rho);
    const double cont = tr.d ? 0.0 : 1.0;
    const double t_hat = tr.r + params.gamma * cont * v(tr.y);
    const double phi = psi(tr.x, tr.a) - v(tr.x);
    out.values[i] = t_hat + params.alpha * phi + gl * cont * b_next;
    b_next = rho * (t_hat - psi(tr.x, tr.a) + params.alpha * phi) + gl * c * cont * b_next;
  }
  return out;
}

TargetBatch retrace_targets(std::span<const Transition> traj, const QTable& q, const Policy& pi,
                            const AlgoParams& params) {
  params.validate();
  check_shapes(q, pi);
  const VTable v = pi.expect(q);
  const double gl = params.gamma * params.lambda;

  TargetBatch out;
  out.values.resize(traj.size());
  double b_next = 0.0;
  for (std::size_t i = traj.size(); i-- > 0;) {
    const Transition& tr = traj[i];
    check_transition(tr, q);
    const double c = std::min(1.0, pi(tr.x, tr.a) / tr.mu_a);
    const double cont = tr.d ? 0.0 : 1.0;
    const double t_hat = tr.r + params.gamma * cont * v(tr.y);
    out.values[i] = t_hat + gl * cont * b_next;
    b_next = c * (t_hat - q(tr.x, tr.a) + gl * cont * b_next);
  }
  return out;
}

QTable table_update_from_targets(const QTable& table, std::span<const Transition> slice,
                                 const TargetBatch& targets, std::optional<double> eta) {
  if (slice.size() != targets.size()) throw std::invalid_argument("slice and targets differ in length");
  if (eta && !(*eta > 0.0 && *eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");

  Table sum = Table::Zero(table.n_states(), table.n_actions());
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> count =
      decltype(count)::Zero(table.n_states(), table.n_actions());
  for (std::size_t t = 0; t < slice.size(); ++t) {
    check_transition(slice[t], table);
    sum(slice[t].x, slice[t].a) += targets[t];
    ++count(slice[t].x, slice[t].a);
  }

  QTable out = table;
  for (Index x = 0; x < table.n_states(); ++x) {
    for (Index a = 0; a < table.n_actions(); ++a) {
      if (count(x, a) == 0) continue;
      const double mean = sum(x, a) / static_cast<double>(count(x, a));
      out(x, a) = eta ? *eta * mean + (1.0 - *eta) * table(x, a) : mean;
    }
  }
  if (!out.all_finite()) throw std::runtime_error("table update produced a non-finite value");
  return out;
}

Policy trpo_softmax_update(const Policy& pi_k, const QTable& adv, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (adv.n_states() != pi_k.n_states() || adv.n_actions() != pi_k.n_actions()) {
    throw std::invalid_argument("advantage and policy shapes differ");
  }
  Table next(pi_k.n_states(), pi_k.n_actions());
  for (Index x = 0; x < pi_k.n_states(); ++x) {
    double top = -std::numeric_limits<double>::infinity();
    for (Index a = 0; a < pi_k.n_actions(); ++a) {
      if (pi_k(x, a) > 0.0) top = std::max(top, beta * adv(x, a));
    }
    double z = 0.0;
    for (Index a = 0; a < pi_k.n_actions(); ++a) {
      next(x, a) = pi_k(x, a) > 0.0 ? pi_k(x, a) * std::exp(beta * adv(x, a) - top) : 0.0;
      z += next(x, a);
    }
    if (!(z > 0.0) || !std::isfinite(z)) throw std::runtime_error("policy row has no mass after update");
    next.row(x) /= z;
  }
  return Policy(std::move(next));
}

QTable advantage_estimate(ModelFreeAlgo algo, const QTable& table, const Policy& pi,
                          const AlgoParams& params) {
  if (algo == ModelFreeAlgo::kGrape) return (1.0 - params.alpha) * pi.center(table);
  return pi.center(table);
}

}  // namespace grape
