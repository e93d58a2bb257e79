#include "grape/dp_lab.hpp"

#include <cmath>
#include <stdexcept>

namespace grape {

double error_decay_coefficient(double alpha, double delta, std::int64_t K, std::int64_t k) {
  if (!(k >= 0 && k < K)) throw std::invalid_argument("error_decay_coefficient: need 0 <= k < K");
  double sum = 0.0;
  const std::int64_t last = K - k - 1;
  for (std::int64_t l = 0; l <= last; ++l) {
    sum += std::pow(alpha, static_cast<double>(last - l)) * std::pow(delta, static_cast<double>(l));
  }
  return sum / geometric_weight(alpha, K);
}

double variance_ratio(double alpha, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("variance_ratio: k must be at least 1");
  double numerator = 0.0;
  double term = 1.0;
  for (std::int64_t l = 0; l <= k; ++l) {
    numerator += term;
    term *= alpha * alpha;
  }
  const double a_k = geometric_weight(alpha, k);
  return numerator / (a_k * a_k);
}

double simulated_variance_ratio(double alpha, std::int64_t k, std::int64_t samples, Rng& rng) {
  if (k < 1 || samples < 2) throw std::invalid_argument("simulated_variance_ratio: need k >= 1, samples >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a_k = geometric_weight(alpha, k);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t n = 1; n <= samples; ++n) {
    // E_k = eps_k + alpha E_{k-1}, E_0 = eps_0.
    double e = 0.0;
    for (std::int64_t j = 0; j <= k; ++j) e = normal(rng) + alpha * e;
    const double v = e / a_k;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  return m2 / static_cast<double>(samples - 1);
}

double mixed_rate_coefficient(double alpha, double delta, std::int64_t K) {
  if (std::abs(alpha - delta) < 1e-12) {
    return static_cast<double>(K) * std::pow(alpha, static_cast<double>(K - 1));
  }
  return (std::pow(alpha, static_cast<double>(K)) - std::pow(delta, static_cast<double>(K))) /
         (alpha - delta);
}

namespace {

NoiseSource replay(const NoiseLedger& ledger) {
  return [&ledger](int k) -> std::optional<QTable> { return ledger.eps(static_cast<std::size_t>(k)); };
}

void require_ledger(const NoiseLedger& ledger, int K, const AlgoParams& params) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (ledger.size() < static_cast<std::size_t>(K)) {
    throw std::invalid_argument("noise ledger holds fewer than K error tables");
  }
  if (ledger.alpha() != params.alpha) {
    throw std::invalid_argument("noise ledger was accumulated with a different alpha");
  }
}

}  // namespace

BoundSides error_bound_sides(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                const AlgoParams& params, int K, const NoiseLedger& ledger,
                                const QTable& psi0) {
  require_ledger(ledger, K, params);
  const GrapeTrajectory run = grape_exact_iterate(mdp, pi, mu, params, K, replay(ledger), psi0);

  const double delta = contraction_modulus(mdp.gamma(), params.lambda);
  const double a_K = geometric_weight(params.alpha, K);
  const VTable v_pi = pi.expect(exact_q_value(mdp, pi));

  BoundSides sides;
  sides.lhs = run.errors.back();
  double noise_term = 0.0;
  for (int k = 0; k < K; ++k) {
    noise_term += std::pow(delta, K - k - 1) * ledger.accumulated(static_cast<std::size_t>(k)).sup_norm() / a_K;
  }
  sides.rhs = 2.0 * delta * mixed_rate_coefficient(params.alpha, delta, K) / a_K *
                  sup_distance(v_pi, pi.expect(psi0)) +
              2.0 * noise_term;
  return sides;
}

double decomposition_identity_check(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                             const AlgoParams& params, int K, const NoiseLedger& ledger,
                             const QTable& psi0) {
  require_ledger(ledger, K, params);
  const GrapeTrajectory run = grape_exact_iterate(mdp, pi, mu, params, K, replay(ledger), psi0);
  const ExactOperators ops(mdp, pi, mu, params.lambda);
  const double alpha = params.alpha;

  // g_powers[k] = G^k Psi_0.
  std::vector<QTable> g_powers{psi0};
  for (int k = 1; k <= K; ++k) g_powers.push_back(ops.grape(g_powers.back()));

  // A_n q_n = sum_{k=1}^{n} alpha^{n-k} G^k Psi_0 + sum_{k=0}^{n-1} H^{n-k-1} E_k.
  auto weighted_q = [&](int n) {
    QTable sum(mdp.n_states(), mdp.n_actions(), 0.0);
    for (int k = 1; k <= n; ++k) sum += std::pow(alpha, n - k) * g_powers[static_cast<std::size_t>(k)];
    for (int k = 0; k < n; ++k) {
      QTable propagated = ledger.accumulated(static_cast<std::size_t>(k));
      for (int j = 0; j < n - k - 1; ++j) propagated = ops.h(propagated);
      sum += propagated;
    }
    return sum;
  };

  const QTable reconstructed = weighted_q(K) - alpha * pi.expect(weighted_q(K - 1));
  return sup_distance(run.psi, reconstructed);
}

double constant_error_asymptote(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                const AlgoParams& params, double epsilon, int K) {
  const QTable eps(mdp.n_states(), mdp.n_actions(), epsilon);
  const NoiseSource constant = [&eps](int) -> std::optional<QTable> { return eps; };
  return grape_exact_iterate(mdp, pi, mu, params, K, constant, QTable(mdp.n_states(), mdp.n_actions(), 0.0))
      .errors.back();
}

}  // namespace grape
