#include "grape/dp_lab.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace grape {

void NoiseLedger::push(const QTable& eps) {
  if (accumulated_.empty()) {
    accumulated_.push_back(eps);
  } else {
    accumulated_.push_back(eps + alpha_ * accumulated_.back());
  }
  eps_.push_back(eps);
}

double geometric_weight(double alpha, std::int64_t K) {
  if (K <= 0) return 0.0;
  if (alpha == 1.0) return static_cast<double>(K);
  if (alpha == 0.0) return 1.0;
  return (1.0 - std::pow(alpha, static_cast<double>(K))) / (1.0 - alpha);
}

IterationSeries dp_noise_trial(const TabularMdp& mdp, DpAlgo algo, const AlgoParams& params,
                               int iters, Rng& rng) {
  params.validate();
  if (iters < 0) throw std::invalid_argument("iters must be nonnegative");
  const double sigma = params.sigma.value_or(0.0);
  if (algo == DpAlgo::kRetraceLr && !params.eta) {
    throw std::invalid_argument("retrace-lr requires eta");
  }
  const TabularMdp model = mdp.gamma() == params.gamma ? mdp : mdp.with_gamma(params.gamma);
  const Index s = model.n_states();
  const Index a = model.n_actions();

  const Policy pi = dirichlet_policy(rng, s, a);
  const Policy mu = dirichlet_policy(rng, s, a);
  QTable table = gaussian_table(rng, s, a, 1.0);
  const ExactOperators ops(model, pi, mu, params.lambda);
  const QTable a_true = advantage_of(exact_q_value(model, pi), pi);

  IterationSeries series;
  series.params = params;
  series.metric = "nrmse";
  series.records.reserve(static_cast<std::size_t>(iters) + 1);

  const double e0 = mean_squared_gap(a_true, pi.center(table));
  series.records.push_back({0, 1.0});

  for (int k = 0; k < iters; ++k) {
    const QTable eps = gaussian_table(rng, s, a, sigma);
    QTable estimate;
    switch (algo) {
      case DpAlgo::kRetrace:
        table = ops.retrace(table) + eps;
        estimate = pi.center(table);
        break;
      case DpAlgo::kRetraceLr:
        table = lr_update(table, ops.retrace(table) + eps, *params.eta);
        estimate = pi.center(table);
        break;
      case DpAlgo::kGrape: {
        QTable next = ops.grape(table) + eps;
        if (k >= 1) next += params.alpha * pi.center(table);
        table = std::move(next);
        estimate = pi.center(table) / geometric_weight(params.alpha, k + 1);
        break;
      }
    }
    series.records.push_back({k + 1, nrmse(a_true, estimate, e0)});
  }
  return series;
}

std::vector<IterationSeries> dp_noise_experiment(const TabularMdp& mdp, DpAlgo algo,
                                                 const AlgoParams& params, int iters, int trials,
                                                 std::uint64_t seed) {
  std::vector<IterationSeries> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(t));
    out.push_back(dp_noise_trial(mdp, algo, params, iters, rng));
    out.back().trial = static_cast<std::size_t>(t);
  }
  return out;
}

std::vector<IterationSeries> retrace_noise_experiment(const TabularMdp& mdp,
                                                      const AlgoParams& params, int iters,
                                                      int trials, std::uint64_t seed) {
  return dp_noise_experiment(mdp, DpAlgo::kRetrace, params, iters, trials, seed);
}

QTable lr_update(const QTable& q, const QTable& target, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (eta == 1.0) return target;
  return eta * target + (1.0 - eta) * q;
}

BoundCheck lr_bound_check(const TabularMdp& mdp, const Policy& pi, double eta, int K) {
  if (K < 0) throw std::invalid_argument("K must be nonnegative");
  const QTable q_pi = exact_q_value(mdp, pi);
  QTable q(mdp.n_states(), mdp.n_actions(), 0.0);
  for (int k = 0; k < K; ++k) q = lr_update(q, bellman_apply(mdp, pi, q), eta);
  BoundCheck out;
  out.measured = sup_distance(q_pi, q);
  out.bound = std::pow(1.0 - eta * (1.0 - mdp.gamma()), K) * mdp.v_max();
  return out;
}

GrapeTrajectory grape_exact_iterate(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                    const AlgoParams& params, int K, const NoiseSource& noise,
                                    const QTable& psi0) {
  if (K < 1) throw std::invalid_argument("grape_exact_iterate: K must be at least 1");
  const ExactOperators ops(mdp, pi, mu, params.lambda);
  const QTable a_true = advantage_of(exact_q_value(mdp, pi), pi);

  GrapeTrajectory run;
  run.ledger = NoiseLedger(params.alpha);
  run.errors.reserve(static_cast<std::size_t>(K));
  QTable psi = psi0;
  QTable phi = pi.center(psi);
  for (int k = 0; k < K; ++k) {
    QTable eps(mdp.n_states(), mdp.n_actions(), 0.0);
    if (noise) {
      if (auto e = noise(k)) eps = std::move(*e);
    }
    QTable next = ops.grape(psi) + eps;
    if (k >= 1) next += params.alpha * phi;
    run.ledger.push(eps);
    psi = std::move(next);
    phi = pi.center(psi);
    run.errors.push_back(sup_distance(a_true, phi / geometric_weight(params.alpha, k + 1)));
  }
  run.psi = std::move(psi);
  run.phi = std::move(phi);
  return run;
}

}  // namespace grape
