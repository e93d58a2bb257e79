#include "grape/verify.hpp"

#include "grape/dp_lab.hpp"
#include "grape/model_free.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grape {

VerifySuite parse_suite(const std::string& name) {
  if (name == "lemmas") return VerifySuite::kLemmas;
  if (name == "theorems") return VerifySuite::kTheorems;
  if (name == "estimators") return VerifySuite::kEstimators;
  throw std::invalid_argument(fmt::format("unknown suite '{}'", name));
}

namespace {

constexpr double kTol = 1e-9;

struct Instance {
  TabularMdp mdp;
  Policy pi;
  Policy mu;
  QTable q;
};

Instance random_instance(Rng& rng, double gamma_lo = 0.0, double gamma_hi = 0.99) {
  const Index s = std::uniform_int_distribution<Index>(1, 6)(rng);
  const Index a = std::uniform_int_distribution<Index>(1, 4)(rng);
  const double gamma = std::uniform_real_distribution<double>(gamma_lo, gamma_hi)(rng);
  TabularMdp mdp = random_mdp(rng, s, a, gamma, 0.2);
  Policy pi = dirichlet_policy(rng, s, a);
  Policy mu = dirichlet_policy(rng, s, a);
  QTable q = gaussian_table(rng, s, a, 5.0);
  return {std::move(mdp), std::move(pi), std::move(mu), std::move(q)};
}

/// Tracks the worst value of `slack = bound - measured` over many cases.
class SlackCheck {
 public:
  explicit SlackCheck(std::string name) : name_(std::move(name)) {}
  void observe(double measured, double bound) {
    ++cases_;
    worst_ = std::min(worst_, bound - measured);
  }
  CheckResult result(double tolerance = kTol) const {
    return {name_, worst_ >= -tolerance, fmt::format("{} cases, worst slack {:.3e}", cases_, worst_)};
  }

 private:
  std::string name_;
  std::size_t cases_ = 0;
  double worst_ = std::numeric_limits<double>::infinity();
};

class ResidualCheck {
 public:
  ResidualCheck(std::string name, double tolerance) : name_(std::move(name)), tolerance_(tolerance) {}
  void observe(double residual) {
    ++cases_;
    worst_ = std::max(worst_, residual);
  }
  CheckResult result() const {
    return {name_, worst_ <= tolerance_, fmt::format("{} cases, worst residual {:.3e}", cases_, worst_)};
  }

 private:
  std::string name_;
  double tolerance_;
  std::size_t cases_ = 0;
  double worst_ = 0.0;
};

std::vector<CheckResult> lemmas(std::uint64_t seed) {
  Rng rng = substream(seed, 1);
  SlackCheck grape_contraction("grape contraction around Q^pi with modulus delta");
  SlackCheck retrace_contraction("retrace contraction around Q^pi with modulus gamma");
  SlackCheck h_contraction("H contraction with modulus delta");
  ResidualCheck linearity("G(q1 + q2) = G q1 + H q2", kTol);
  ResidualCheck reductions("lambda = 0 gives G = R = T", kTol);
  for (int i = 0; i < 200; ++i) {
    const Instance inst = random_instance(rng);
    const QTable q_pi = exact_q_value(inst.mdp, inst.pi);
    const QTable q2 = gaussian_table(rng, inst.mdp.n_states(), inst.mdp.n_actions(), 5.0);
    for (double lambda : {0.0, 0.5, 1.0}) {
      const ExactOperators ops(inst.mdp, inst.pi, inst.mu, lambda);
      const double delta = contraction_modulus(inst.mdp.gamma(), lambda);
      const double dist = sup_distance(q_pi, inst.q);
      grape_contraction.observe(sup_distance(q_pi, ops.grape(inst.q)), delta * dist);
      retrace_contraction.observe(sup_distance(q_pi, ops.retrace(inst.q)), inst.mdp.gamma() * dist);
      h_contraction.observe(ops.h(inst.q).sup_norm(), delta * inst.q.sup_norm());
      linearity.observe(sup_distance(ops.grape(inst.q + q2), ops.grape(inst.q) + ops.h(q2)));
      if (lambda == 0.0) {
        const QTable t = ops.bellman(inst.q);
        reductions.observe(std::max(sup_distance(t, ops.grape(inst.q)), sup_distance(t, ops.retrace(inst.q))));
      }
    }
  }

  ResidualCheck decomposition("accumulated-error decomposition of Psi_K", 1e-8);
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_instance(rng);
    AlgoParams params;
    params.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    params.lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const int K = std::uniform_int_distribution<int>(1, 30)(rng);
    NoiseLedger ledger(params.alpha);
    for (int k = 0; k < K; ++k) ledger.push(gaussian_table(rng, inst.mdp.n_states(), inst.mdp.n_actions(), 0.4));
    decomposition.observe(decomposition_identity_check(inst.mdp, inst.pi, inst.mu, params, K, ledger, inst.q));
  }

  return {grape_contraction.result(), retrace_contraction.result(), h_contraction.result(),
          linearity.result(), reductions.result(), decomposition.result()};
}

std::vector<CheckResult> theorems(std::uint64_t seed) {
  Rng rng = substream(seed, 2);
  std::vector<CheckResult> out;

  ResidualCheck limit_phi("Phi_K / A_K -> A^pi (relative to V_max)", 1e-6);
  ResidualCheck limit_psi("Psi_K / A_K -> A^pi + (1 - alpha) V^pi (relative to V_max)", 1e-6);
  for (int i = 0; i <= 20; ++i) {
    Instance inst = i == 0 ? Instance{two_state_mdp(), Policy::uniform(2, 2), Policy::uniform(2, 2),
                                      QTable(2, 2, 0.0)}
                           : random_instance(rng, 0.3, 0.95);
    const QTable q_pi = exact_q_value(inst.mdp, inst.pi);
    const QTable a_pi = advantage_of(q_pi, inst.pi);
    const VTable v_pi = inst.pi.expect(q_pi);
    for (double alpha : {0.0, 0.5, 0.9}) {
      AlgoParams params;
      params.alpha = alpha;
      params.lambda = 0.5;
      const double rate = std::max(alpha, contraction_modulus(inst.mdp.gamma(), params.lambda));
      const int K = std::max(1, static_cast<int>(std::ceil(std::log(1e-8) / std::log(rate))) + 1);
      const GrapeTrajectory run = grape_exact_iterate(inst.mdp, inst.pi, inst.mu, params, K, {}, inst.q);
      const double a_K = geometric_weight(alpha, K);
      limit_phi.observe(sup_distance(run.phi / a_K, a_pi) / inst.mdp.v_max());
      limit_psi.observe(sup_distance(run.psi / a_K, a_pi + (1.0 - alpha) * v_pi) / inst.mdp.v_max());
    }
  }
  out.push_back(limit_phi.result());
  out.push_back(limit_psi.result());

  {
    const TabularMdp mdp = two_state_mdp(0.9);
    const Policy pi = Policy::uniform(2, 2);
    AlgoParams params;
    params.alpha = 1.0;
    params.lambda = 0.5;
    const QTable psi0 = gaussian_table(rng, 2, 2, 1.0);
    const GrapeTrajectory run = grape_exact_iterate(mdp, pi, pi, params, 2000, {}, psi0);
    const double e1000 = run.errors[999];
    const double e2000 = run.errors[1999];
    out.push_back({"alpha = 1 error shrinks from K = 1000 to K = 2000", e2000 <= e1000,
                   fmt::format("{:.3e} -> {:.3e}", e1000, e2000)});
  }

  SlackCheck error_bound("noisy GRAPE error within the accumulated-error bound");
  for (int i = 0; i < 30; ++i) {
    const Instance inst = random_instance(rng);
    AlgoParams params;
    params.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    params.lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const int K = std::uniform_int_distribution<int>(1, 200)(rng);
    NoiseLedger ledger(params.alpha);
    for (int k = 0; k < K; ++k) ledger.push(gaussian_table(rng, inst.mdp.n_states(), inst.mdp.n_actions(), 0.4));
    const BoundSides sides = error_bound_sides(inst.mdp, inst.pi, inst.mu, params, K, ledger, inst.q);
    error_bound.observe(sides.lhs, sides.rhs);
  }
  out.push_back(error_bound.result());

  ResidualCheck lr_equal("learning-rate bound is tight for one state", 1e-12);
  for (double eta : {0.1, 0.5, 1.0}) {
    for (int K : {0, 1, 10, 100}) {
      const BoundCheck c = lr_bound_check(single_state_mdp(1.0, 0.9), Policy::uniform(1, 1), eta, K);
      lr_equal.observe(std::abs(c.measured - c.bound));
    }
  }
  out.push_back(lr_equal.result());
  SlackCheck lr_bound("learning-rate bound on random MDPs");
  SlackCheck reuse("initialization-reuse bound");
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_instance(rng);
    const double eta = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const BoundCheck c = lr_bound_check(inst.mdp, inst.pi, eta, std::uniform_int_distribution<int>(0, 100)(rng));
    lr_bound.observe(c.measured, c.bound);
    const BoundSides r = reuse_bound_sides(inst.mdp, inst.pi, inst.mu, inst.q);
    reuse.observe(r.lhs, r.rhs);
  }
  out.push_back(lr_bound.result());
  out.push_back(reuse.result());

  SlackCheck constant("constant error stays within 2 eps / (1 - delta)");
  for (int i = 0; i < 5; ++i) {
    const Instance inst = i == 0 ? Instance{two_state_mdp(), Policy::uniform(2, 2), Policy::uniform(2, 2),
                                            QTable(2, 2, 0.0)}
                                 : random_instance(rng, 0.3, 0.9);
    for (double alpha : {0.0, 1.0}) {
      AlgoParams params;
      params.alpha = alpha;
      params.lambda = 0.5;
      const double delta = contraction_modulus(inst.mdp.gamma(), params.lambda);
      constant.observe(constant_error_asymptote(inst.mdp, inst.pi, inst.mu, params, 0.1, 5000),
                       2.0 * 0.1 / (1.0 - delta));
    }
  }
  out.push_back(constant.result(1e-6));

  {
    const double v = variance_ratio(0.99, 1'000'000);
    out.push_back({"variance ratio limit at alpha = 0.99", std::abs(v - 0.01 / 1.99) < 1e-9,
                   fmt::format("{:.7f}", v)});
  }
  {
    const double big_first = error_decay_coefficient(0.99, 0.5, 50, 0);
    const double small_first = error_decay_coefficient(0.0, 0.5, 50, 0);
    const double big_last = error_decay_coefficient(0.99, 0.5, 50, 49);
    const double small_last = error_decay_coefficient(0.0, 0.5, 50, 49);
    out.push_back({"large alpha weights old errors more and recent errors less",
                   big_first > small_first && big_last < small_last,
                   fmt::format("k=0: {:.3e} vs {:.3e}; k=49: {:.3e} vs {:.3e}", big_first, small_first, big_last,
                               small_last)});
  }
  return out;
}

struct MeanEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

template <typename TargetFn>
MeanEstimate first_target_mean(const NChainConfig& base, Index x0, Index a0, const Policy& mu, int episodes,
                               int horizon, Rng& rng, TargetFn&& target) {
  NChainConfig cfg = base;
  cfg.start_state = x0;
  NChainEnv env(cfg, Rng(rng()));
  std::vector<Transition> traj;
  double mean = 0.0;
  double m2 = 0.0;
  for (int n = 1; n <= episodes; ++n) {
    traj.clear();
    Index x = env.reset();
    Index a = a0;
    for (int t = 0; t < horizon; ++t) {
      const StepResult s = env.step(a);
      traj.push_back({x, a, s.reward, s.next, mu(x, a), s.done});
      if (s.done) break;
      x = s.next;
      a = static_cast<Index>(sample_index(rng, {mu.table().row(x).data(), static_cast<std::size_t>(mu.n_actions())}));
    }
    const double g = target(traj);
    const double d = g - mean;
    mean += d / n;
    m2 += d * (g - mean);
  }
  return {mean, std::sqrt(m2 / (episodes - 1) / episodes)};
}

std::vector<CheckResult> estimators(std::uint64_t seed) {
  Rng rng = substream(seed, 3);
  std::vector<CheckResult> out;

  NChainConfig cfg;
  cfg.slip_prob = 0.2;
  const TabularMdp mdp = nchain_mdp(cfg, 0.99);
  const Policy pi = dirichlet_policy(rng, mdp.n_states(), 2);
  const Policy mu = dirichlet_policy(rng, mdp.n_states(), 2);
  const QTable psi = gaussian_table(rng, mdp.n_states(), 2, 1.0);
  constexpr int kEpisodes = 20000;
  constexpr double kSigmas = 4.0;

  double worst_grape = 0.0;
  double worst_retrace = 0.0;
  for (double lambda : {0.0, 0.8}) {
    const ExactOperators ops(mdp, pi, mu, lambda);
    const QTable exact_g = ops.grape(psi);
    const QTable exact_r = ops.retrace(psi);
    const int horizon = lambda == 0.0 ? 1 : 200;
    for (double alpha : {0.0, 0.5, 0.99}) {
      AlgoParams params;
      params.alpha = alpha;
      params.lambda = lambda;
      const QTable phi = pi.center(psi);
      const MeanEstimate m = first_target_mean(cfg, 10, kNChainRight, mu, kEpisodes, horizon, rng,
                                               [&](const std::vector<Transition>& traj) {
                                                 return grape_targets(traj, psi, pi, params)[0];
                                               });
      const double exact = exact_g(10, kNChainRight) + alpha * phi(10, kNChainRight);
      worst_grape = std::max(worst_grape, std::abs(m.mean - exact) / m.stderr_mean);
    }
    AlgoParams params;
    params.lambda = lambda;
    const MeanEstimate m = first_target_mean(cfg, 10, kNChainRight, mu, kEpisodes, horizon, rng,
                                             [&](const std::vector<Transition>& traj) {
                                               return retrace_targets(traj, psi, pi, params)[0];
                                             });
    worst_retrace = std::max(worst_retrace, std::abs(m.mean - exact_r(10, kNChainRight)) / m.stderr_mean);
  }
  out.push_back({"sampled GRAPE target mean matches G Psi + alpha Phi", worst_grape <= kSigmas,
                 fmt::format("worst deviation {:.2f} standard errors", worst_grape)});
  out.push_back({"sampled Retrace target mean matches R Q", worst_retrace <= kSigmas,
                 fmt::format("worst deviation {:.2f} standard errors", worst_retrace)});

  {
    const Policy base = dirichlet_policy(rng, 5, 3);
    const QTable adv = gaussian_table(rng, 5, 3, 3.0);
    QTable shifted = adv;
    for (Index x = 0; x < 5; ++x) {
      const double c = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
      for (Index a = 0; a < 3; ++a) shifted(x, a) += c;
    }
    const Policy p1 = trpo_softmax_update(base, adv, 2.0);
    const Policy p2 = trpo_softmax_update(base, shifted, 2.0);
    const double gap = (p1.table() - p2.table()).cwiseAbs().maxCoeff();
    out.push_back({"softmax update ignores per-state shifts", gap < 1e-12, fmt::format("max gap {:.3e}", gap)});
  }

  {
    AlgoParams params;
    params.alpha = 0.5;
    params.lambda = 0.9;
    const std::vector<Transition> first{{10, 1, 0.0, 11, 0.5, false}, {11, 1, 0.0, 12, 0.5, false},
                                        {12, 0, 0.0, 0, 0.5, true}};
    std::vector<Transition> a = first;
    std::vector<Transition> b = first;
    a.push_back({5, 0, 0.0, 4, 0.3, false});
    a.push_back({4, 0, 0.0, 3, 0.3, false});
    b.push_back({19, 1, 0.0, 20, 0.7, false});
    b.push_back({20, 1, 1.0, 21, 0.7, true});
    const TargetBatch ta = grape_targets(a, psi, pi, params);
    const TargetBatch tb = grape_targets(b, psi, pi, params);
    double gap = 0.0;
    for (std::size_t t = 0; t < first.size(); ++t) gap = std::max(gap, std::abs(ta[t] - tb[t]));
    out.push_back({"episode targets ignore later episodes in the slice", gap == 0.0,
                   fmt::format("max gap {:.3e}", gap)});
  }

  {
    // Near the GRAPE fixed point V + A / (1 - alpha), centering removes the large action gaps.
    const double alpha = 0.99;
    const QTable q_pi = exact_q_value(mdp, pi);
    const QTable fixed = QTable(q_pi.table()) - pi.center(q_pi) + pi.center(q_pi) / (1.0 - alpha);
    const QTable near = fixed + gaussian_table(rng, mdp.n_states(), 2, 0.05);
    const VTable v = pi.expect(near);
    NChainEnv env(cfg, Rng(rng()));
    double sum_c = 0.0, sum_c2 = 0.0, sum_v = 0.0, sum_v2 = 0.0;
    constexpr int kSamples = 100000;
    for (int n = 0; n < kSamples; ++n) {
      if (env.at_terminal()) env.reset();
      const Index x = env.state();
      const Index a = static_cast<Index>(sample_index(rng, {mu.table().row(x).data(), 2}));
      const StepResult s = env.step(a);
      const double t_hat = s.reward + (s.done ? 0.0 : mdp.gamma() * v(s.next));
      const double vanilla = t_hat - near(x, a);
      const double centered = t_hat - near(x, a) + alpha * (near(x, a) - v(x));
      sum_v += vanilla;
      sum_v2 += vanilla * vanilla;
      sum_c += centered;
      sum_c2 += centered * centered;
    }
    const double var_v = sum_v2 / kSamples - (sum_v / kSamples) * (sum_v / kSamples);
    const double var_c = sum_c2 / kSamples - (sum_c / kSamples) * (sum_c / kSamples);
    out.push_back({"centered residual has lower variance than the plain TD residual", var_c < var_v,
                   fmt::format("{:.3e} vs {:.3e}", var_c, var_v)});
  }
  return out;
}

}  // namespace

std::vector<CheckResult> run_verify_suite(VerifySuite suite, std::uint64_t seed) {
  switch (suite) {
    case VerifySuite::kLemmas: return lemmas(seed);
    case VerifySuite::kTheorems: return theorems(seed);
    case VerifySuite::kEstimators: return estimators(seed);
  }
  return {};
}

}  // namespace grape
