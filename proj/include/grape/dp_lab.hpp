#pragma once

#include "grape/metrics.hpp"
#include "grape/operators.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grape {

/**
 * Injected error tables eps_k and their alpha-discounted accumulation
 * E_k = sum_{l<=k} alpha^l eps_{k-l}, maintained as E_k = eps_k + alpha E_{k-1}.
 */
class NoiseLedger {
 public:
  explicit NoiseLedger(double alpha) : alpha_(alpha) {}

  void push(const QTable& eps);

  std::size_t size() const { return eps_.size(); }
  double alpha() const { return alpha_; }
  const QTable& eps(std::size_t k) const { return eps_.at(k); }
  const QTable& accumulated(std::size_t k) const { return accumulated_.at(k); }

 private:
  double alpha_;
  std::vector<QTable> eps_;
  std::vector<QTable> accumulated_;
};

struct IterationRecord {
  std::int64_t iteration = 0;
  double value = 0.0;
};

struct IterationSeries {
  std::size_t trial = 0;
  AlgoParams params;
  std::string metric;
  std::vector<IterationRecord> records;
};

enum class DpAlgo { kRetrace, kRetraceLr, kGrape };

/// Sum_{k=0}^{K-1} alpha^k, with A_0 = 0.
double geometric_weight(double alpha, std::int64_t K);

/**
 * One trial of the noisy exact-DP experiment: pi, mu ~ flat Dirichlet, initial
 * table ~ N(0, 1), and every update perturbed by i.i.d. N(0, sigma) noise.
 * Records the NRMSE of the advantage estimate at iterations 0..iters.
 *
 *  - retrace:     Q <- R Q + eps
 *  - retrace-lr:  Q <- eta (R Q + eps) + (1 - eta) Q
 *  - grape:       Psi <- G Psi + alpha Phi + eps, advantage estimate Phi_k / A_k
 */
IterationSeries dp_noise_trial(const TabularMdp& mdp, DpAlgo algo, const AlgoParams& params,
                               int iters, Rng& rng);

/// `trials` independent runs of dp_noise_trial, trial i seeded by substream(seed, i).
std::vector<IterationSeries> dp_noise_experiment(const TabularMdp& mdp, DpAlgo algo,
                                                 const AlgoParams& params, int iters, int trials,
                                                 std::uint64_t seed);

std::vector<IterationSeries> retrace_noise_experiment(const TabularMdp& mdp,
                                                      const AlgoParams& params, int iters,
                                                      int trials, std::uint64_t seed);

/// eta * target + (1 - eta) * q.
QTable lr_update(const QTable& q, const QTable& target, double eta);

struct BoundCheck {
  double measured = 0.0;
  double bound = 0.0;
};

/// Runs Q_{k+1} = eta T Q_k + (1 - eta) Q_k from Q_0 = 0 for K steps and
/// compares ||Q^pi - Q_K|| against (1 - eta (1 - gamma))^K V_max.
BoundCheck lr_bound_check(const TabularMdp& mdp, const Policy& pi, double eta, int K);

/// Returns eps_k for iteration k, or nullopt for a noiseless update.
using NoiseSource = std::function<std::optional<QTable>(int k)>;

struct GrapeTrajectory {
  /// errors[k - 1] = ||A^pi - Phi_k / A_k|| for k = 1..K.
  std::vector<double> errors;
  QTable psi;
  QTable phi;
  NoiseLedger ledger{0.0};
};

/**
 * Exact GRAPE: Psi_1 = G Psi_0 + eps_0, Psi_{k+1} = G Psi_k + alpha Phi_k + eps_k
 * with Phi_k = Psi_k - pi Psi_k. Every injected eps_k (zero when the source
 * returns nullopt) is recorded in the returned ledger.
 */
GrapeTrajectory grape_exact_iterate(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                    const AlgoParams& params, int K, const NoiseSource& noise,
                                    const QTable& psi0);

/// A_K^{-1} sum_{l=0}^{K-k-1} alpha^{K-k-l-1} delta^l: weight of the error made at iteration k.
double error_decay_coefficient(double alpha, double delta, std::int64_t K, std::int64_t k);

/// (sum_{l=0}^{k} alpha^{2l}) / A_k^2, the variance of E_k / A_k under unit i.i.d. noise.
double variance_ratio(double alpha, std::int64_t k);

/// Monte-Carlo estimate of Var(E_k / A_k) from `samples` simulated noise sequences.
double simulated_variance_ratio(double alpha, std::int64_t k, std::int64_t samples, Rng& rng);

/// (alpha^K - delta^K) / (alpha - delta), or K alpha^{K-1} when the two coincide.
double mixed_rate_coefficient(double alpha, double delta, std::int64_t K);

/**
 * lhs = ||A^pi - Phi_K / A_K|| from replaying the ledger's noise;
 * rhs = (2 delta Gamma_K / A_K) ||V^pi - pi Psi_0|| + 2 sum_k delta^{K-k-1} ||E_k / A_K||.
 */
BoundSides error_bound_sides(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                const AlgoParams& params, int K, const NoiseLedger& ledger,
                                const QTable& psi0);

/**
 * Max-abs residual of Psi_K = A_K q_K - alpha A_{K-1} pi q_{K-1}, with A_K q_K
 * built from powers of G on Psi_0 and powers of H on the accumulated errors.
 */
double decomposition_identity_check(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                             const AlgoParams& params, int K, const NoiseLedger& ledger,
                             const QTable& psi0);

/// ||A^pi - Phi_K / A_K|| after K iterations with the constant error table eps = epsilon.
double constant_error_asymptote(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                const AlgoParams& params, double epsilon, int K);

}  // namespace grape
