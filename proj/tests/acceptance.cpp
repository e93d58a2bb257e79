// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances and budgets are fixed here.

#include "grape/experiments.hpp"
#include "grape/model_free.hpp"

#include <fmt/format.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

using namespace grape;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------- helpers

struct RandomProblem {
  TabularMdp mdp;
  Policy pi;
  Policy mu;
  QTable q;
};

RandomProblem random_problem(Rng& rng, double gamma) {
  std::uniform_int_distribution<int> ns(2, 6), na(1, 4);
  const Index s = ns(rng), a = na(rng);
  TabularMdp mdp = random_mdp(rng, s, a, gamma, 0.15);
  Policy pi = dirichlet_policy(rng, s, a);
  Policy mu = dirichlet_policy(rng, s, a);
  QTable q = gaussian_table(rng, s, a, mdp.v_max());
  return {std::move(mdp), std::move(pi), std::move(mu), std::move(q)};
}

double pick_gamma(int i) {
  static constexpr double kGammas[] = {0.5, 0.9, 0.99};
  return kGammas[i % 3];
}

AlgoParams params_for(const TabularMdp& m, double alpha, double lambda) {
  AlgoParams p;
  p.alpha = alpha;
  p.lambda = lambda;
  p.gamma = m.gamma();
  return p;
}

Policy skewed_two_state() {
  Table t(2, 2);
  t << 0.9, 0.1, 0.3, 0.7;
  return Policy(t);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median across trials at every step, for rows of one grid point.
std::vector<double> median_curve(const std::vector<ResultRow>& rows) {
  std::map<std::int64_t, std::vector<double>> by_step;
  for (const ResultRow& r : rows) by_step[r.step].push_back(r.value);
  std::vector<double> out;
  for (auto& [step, v] : by_step) out.push_back(median(v));
  return out;
}

double tail_mean(const std::vector<double>& curve, double fraction) {
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(curve.size() - 1))));
  double s = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) s += curve[i];
  return s / static_cast<double>(n);
}

std::vector<ResultRow> rows_where(const std::vector<ResultRow>& rows, const std::function<bool(const ResultRow&)>& keep) {
  std::vector<ResultRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), keep);
  return out;
}

// ---------------------------------------------------------------- criteria

Outcome operator_contraction(bool grape_operator) {
  Rng rng = substream(kSeed, grape_operator ? 1 : 2);
  int checks = 0, violations = 0;
  double worst = -1e300;
  for (int i = 0; i < 200; ++i) {
    const RandomProblem p = random_problem(rng, pick_gamma(i));
    const QTable qpi = exact_q_value(p.mdp, p.pi);
    const double gap = sup_distance(qpi, p.q);
    for (double lambda : {0.0, 0.5, 1.0}) {
      const ExactOperators ops(p.mdp, p.pi, p.mu, lambda);
      const double delta = contraction_modulus(p.mdp.gamma(), lambda);
      std::vector<double> slack;
      if (grape_operator) {
        slack.push_back(sup_distance(qpi, ops.grape(p.q)) - delta * gap);
      } else {
        slack.push_back(sup_distance(qpi, ops.retrace(p.q)) - p.mdp.gamma() * gap);
        slack.push_back(ops.h(p.q).sup_norm() - delta * p.q.sup_norm());
      }
      for (double s : slack) {
        ++checks;
        violations += s > 1e-9;
        worst = std::max(worst, s);
      }
    }
  }
  return {violations == 0, fmt::format("{} checks, {} violations, max slack {:.3g}", checks, violations, worst)};
}

Outcome fixed_points() {
  Rng rng = substream(kSeed, 3);
  struct Case {
    TabularMdp mdp;
    Policy pi;
    Policy mu;
    double lambda;
  };
  std::vector<Case> cases;
  cases.push_back({two_state_mdp(0.5), Policy::uniform(2, 2), skewed_two_state(), 0.5});
  for (int i = 0; i < 20; ++i) {
    RandomProblem p = random_problem(rng, 0.9);
    cases.push_back({std::move(p.mdp), std::move(p.pi), std::move(p.mu), 0.5 * (i % 3)});
  }
  double worst_phi = 0.0, worst_psi = 0.0;
  bool ok = true;
  int slow_alpha_one = 0;
  for (const Case& c : cases) {
    const QTable qpi = exact_q_value(c.mdp, c.pi);
    const QTable adv = advantage_of(qpi, c.pi);
    const VTable v = c.pi.expect(qpi);
    const double tol = 1e-6 * c.mdp.v_max();
    const QTable psi0 = gaussian_table(rng, c.mdp.n_states(), c.mdp.n_actions(), 1.0);
    for (double alpha : {0.0, 0.5, 0.9}) {
      const AlgoParams p = params_for(c.mdp, alpha, c.lambda);
      const double rate = std::max(alpha, contraction_modulus(p));
      const int K = static_cast<int>(std::ceil(std::log(1e-8) / std::log(rate)));
      const GrapeTrajectory run = grape_exact_iterate(c.mdp, c.pi, c.mu, p, K, {}, psi0);
      const double a_k = geometric_weight(alpha, K);
      const double e_phi = sup_distance(run.phi / a_k, adv);
      const double e_psi = sup_distance(run.psi / a_k, adv + (1.0 - alpha) * v);
      worst_phi = std::max(worst_phi, e_phi / c.mdp.v_max());
      worst_psi = std::max(worst_psi, e_psi / c.mdp.v_max());
      ok = ok && e_phi <= tol && e_psi <= tol;
    }
    const GrapeTrajectory one = grape_exact_iterate(c.mdp, c.pi, c.mu, params_for(c.mdp, 1.0, c.lambda), 2000, {}, psi0);
    if (!(one.errors[1999] <= one.errors[999])) ++slow_alpha_one;
  }
  ok = ok && slow_alpha_one == 0;
  return {ok, fmt::format("{} MDPs; worst error / V_max: Phi {:.2e}, Psi {:.2e}; alpha=1 non-decreasing cases: {}",
                          cases.size(), worst_phi, worst_psi, slow_alpha_one)};
}

NoiseSource gaussian_noise(Rng& rng, Index s, Index a, double sigma) {
  return [&rng, s, a, sigma](int) -> std::optional<QTable> { return gaussian_table(rng, s, a, sigma); };
}

Outcome decomposition_identity() {
  Rng rng = substream(kSeed, 4);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RandomProblem p = random_problem(rng, pick_gamma(i));
    const AlgoParams params = params_for(p.mdp, std::uniform_real_distribution<double>(0, 1)(rng), 0.5 * (i % 3));
    const int K = 10 + 4 * i;
    const QTable psi0 = gaussian_table(rng, p.mdp.n_states(), p.mdp.n_actions(), 1.0);
    const GrapeTrajectory run =
        grape_exact_iterate(p.mdp, p.pi, p.mu, params, K, gaussian_noise(rng, p.mdp.n_states(), p.mdp.n_actions(), 0.4), psi0);
    worst = std::max(worst, decomposition_identity_check(p.mdp, p.pi, p.mu, params, K, run.ledger, psi0));
  }
  return {worst <= 1e-8, fmt::format("50 runs, max residual {:.3g} (tolerance 1e-8)", worst)};
}

Outcome noisy_error_bound() {
  Rng rng = substream(kSeed, 5);
  int violations = 0;
  double tightest = 0.0;
  for (int i = 0; i < 100; ++i) {
    const bool two_state = i % 5 == 0;
    RandomProblem p = two_state ? RandomProblem{two_state_mdp(0.5), Policy::uniform(2, 2), skewed_two_state(), QTable(2, 2)}
                                : random_problem(rng, pick_gamma(i));
    const AlgoParams params = params_for(p.mdp, std::uniform_real_distribution<double>(0, 1)(rng), 0.5 * (i % 3));
    const int K = 5 + 2 * i;
    const QTable psi0 = gaussian_table(rng, p.mdp.n_states(), p.mdp.n_actions(), 1.0);
    const GrapeTrajectory run =
        grape_exact_iterate(p.mdp, p.pi, p.mu, params, K, gaussian_noise(rng, p.mdp.n_states(), p.mdp.n_actions(), 0.4), psi0);
    const BoundSides s = error_bound_sides(p.mdp, p.pi, p.mu, params, K, run.ledger, psi0);
    violations += s.lhs > s.rhs + 1e-9;
    tightest = std::max(tightest, s.lhs / s.rhs);
  }
  return {violations == 0, fmt::format("100 runs, {} violations, max lhs/rhs {:.3f}", violations, tightest)};
}

Outcome frozenlake_dp_noise() {
  const TabularMdp lake = frozenlake_mdp(0.99);
  AlgoParams p;
  p.lambda = 0.8;
  p.gamma = 0.99;
  p.sigma = 0.0;
  const auto clean = retrace_noise_experiment(lake, p, 1000, 100, kSeed);
  p.sigma = 0.8;
  const auto noisy = retrace_noise_experiment(lake, p, 1000, 100, kSeed);
  std::vector<double> last;
  for (const auto& s : clean) last.push_back(s.records.back().value);
  const double clean_median = median(last);
  double noisy_min = 1e300;
  for (std::size_t k = 0; k <= 1000; ++k) {
    std::vector<double> v;
    for (const auto& s : noisy) v.push_back(s.records[k].value);
    noisy_min = std::min(noisy_min, median(v));
  }
  return {clean_median < 0.05 && noisy_min > 0.5,
          fmt::format("sigma=0 median at 1000: {:.3g} (< 0.05); sigma=0.8 min median over iterations: {:.3f} (> 0.5)",
                      clean_median, noisy_min)};
}

Outcome lr_bound() {
  double worst_gap = 0.0;
  for (double eta : {0.1, 0.3, 0.7, 1.0})
    for (int K : {0, 1, 10, 100, 500}) {
      const BoundCheck b = lr_bound_check(single_state_mdp(1.0, 0.9), Policy::uniform(1, 1), eta, K);
      worst_gap = std::max(worst_gap, std::abs(b.measured - b.bound));
    }
  Rng rng = substream(kSeed, 7);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const RandomProblem p = random_problem(rng, pick_gamma(i));
    const double eta = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const BoundCheck b = lr_bound_check(p.mdp, p.pi, eta, 3 * i);
    violations += b.measured > b.bound + 1e-9;
  }
  return {worst_gap <= 1e-12 && violations == 0,
          fmt::format("one-state max |measured - bound| {:.2e}; random MDPs: {} violations of 100", worst_gap, violations)};
}

Outcome variance_limit() {
  const double analytic = variance_ratio(0.99, 1'000'000);
  Rng rng = substream(kSeed, 8);
  const double formula = variance_ratio(0.99, 2000);
  const double simulated = simulated_variance_ratio(0.99, 2000, 100'000, rng);
  const double rel = std::abs(simulated / formula - 1.0);
  return {std::abs(analytic - 0.0050251) < 5e-8 && rel < 0.05,
          fmt::format("limit {:.7f}; k=2000 formula {:.6f}, simulated {:.6f} ({:.2f}% off)", analytic, formula, simulated,
                      100 * rel)};
}

std::vector<Transition> episode(NChainEnv& env, Index a0, const Policy& mu, Rng& rng) {
  std::vector<Transition> out;
  Index x = env.reset();
  Index a = a0;
  while (true) {
    const StepResult s = env.step(a);
    out.push_back({x, a, s.reward, s.next, mu(x, a), s.done});
    if (s.done) break;
    x = s.next;
    a = static_cast<Index>(sample_index(rng, std::span<const double>(mu.table().row(x).data(), 2)));
  }
  return out;
}

Outcome target_unbiasedness() {
  NChainConfig cfg;
  cfg.slip_prob = 0.2;
  const TabularMdp m = nchain_mdp(cfg, 0.99);
  Rng rng = substream(kSeed, 9);
  const Policy pi = dirichlet_policy(rng, m.n_states(), 2);
  const Policy mu = dirichlet_policy(rng, m.n_states(), 2);
  const QTable psi = gaussian_table(rng, m.n_states(), 2, 1.0);
  const Index x0 = *cfg.start_state;
  const Index a0 = kNChainRight;
  const std::vector<double> alphas{0.0, 0.5, 0.99};
  const int episodes = 100'000;

  bool ok = true;
  std::string detail;
  double worst_z = 0.0;
  for (double lambda : {0.0, 0.8}) {
    const ExactOperators ops(m, pi, mu, lambda);
    const QTable g = ops.grape(psi);
    const QTable centered = pi.center(psi);
    std::vector<double> sum(alphas.size() + 1), sq(alphas.size() + 1);
    NChainEnv env(cfg, substream(kSeed, 90 + static_cast<std::uint64_t>(lambda * 10)));
    for (int e = 0; e < episodes; ++e) {
      const std::vector<Transition> ep = episode(env, a0, mu, rng);
      for (std::size_t i = 0; i <= alphas.size(); ++i) {
        AlgoParams p = params_for(m, i < alphas.size() ? alphas[i] : 0.0, lambda);
        const double t = i < alphas.size() ? grape_targets(ep, psi, pi, p)[0] : retrace_targets(ep, psi, pi, p)[0];
        sum[i] += t;
        sq[i] += t * t;
      }
    }
    for (std::size_t i = 0; i <= alphas.size(); ++i) {
      const double mean = sum[i] / episodes;
      const double var = (sq[i] - episodes * mean * mean) / (episodes - 1);
      const double se = std::sqrt(var / episodes);
      const double exact = i < alphas.size() ? g(x0, a0) + alphas[i] * centered(x0, a0) : ops.retrace(psi)(x0, a0);
      const double z = std::abs(mean - exact) / se;
      worst_z = std::max(worst_z, z);
      ok = ok && z <= 3.0;
      detail += fmt::format("{}{}(lambda={}{}): z={:.2f}", detail.empty() ? "" : "; ", i < alphas.size() ? "G" : "R", lambda,
                            i < alphas.size() ? fmt::format(", alpha={}", alphas[i]) : "", z);
    }
  }
  return {ok, fmt::format("max |z| {:.2f} (<= 3); {}", worst_z, detail)};
}

ExperimentConfig nchain_config(const std::string& algo, std::vector<double> rates, int blocks) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kNChainEval;
  c.algo = algo;
  (algo == "grape" ? c.alpha : c.eta) = std::move(rates);
  c.lambda = {0.0};
  c.slip = 0.2;
  c.blocks = blocks;
  c.block_size = 250;
  c.trials = 8;
  c.seed = kSeed;
  return c;
}

std::vector<double> curve_for(const std::vector<ResultRow>& rows, std::optional<double> alpha, std::optional<double> eta) {
  return median_curve(rows_where(rows, [&](const ResultRow& r) { return r.alpha == alpha && r.eta == eta; }));
}

Outcome nchain_model_free() {
  // Short horizon: the final median error ratio after the default 800 blocks.
  const auto g_short = run_experiment(nchain_config("grape", {0.99}, 800));
  const auto r_short = run_experiment(nchain_config("retrace-lr", {1.0}, 800));
  const double g_final = curve_for(g_short, 0.99, std::nullopt).back();
  const double r_final = curve_for(r_short, std::nullopt, 1.0).back();
  const bool part_a = g_final < 0.5 * r_final;

  // Asymptotic level: long enough that the slowest learning rate's bias factor
  // (1 - eta (1 - gamma))^K drops below 1%; averaged over the final 20% of blocks.
  const double slowest = 0.01;
  const int blocks = static_cast<int>(std::ceil(std::log(0.01) / std::log(1.0 - slowest * (1.0 - 0.99))));
  const auto g_long = run_experiment(nchain_config("grape", {0.9, 0.99}, blocks));
  const auto r_long = run_experiment(nchain_config("retrace-lr", {0.1, 0.01}, blocks));
  bool part_b = true;
  std::string pairs;
  for (double alpha : {0.9, 0.99}) {
    const double eta = 1.0 - alpha;
    const double ga = tail_mean(curve_for(g_long, alpha, std::nullopt), 0.2);
    const double ra = tail_mean(curve_for(r_long, std::nullopt, std::round(eta * 100) / 100), 0.2);
    const double factor = std::max(ga, ra) / std::min(ga, ra);
    part_b = part_b && factor <= 2.0;
    pairs += fmt::format("; alpha={} vs eta={}: {:.4f} vs {:.4f} (factor {:.2f})", alpha, std::round(eta * 100) / 100, ga, ra,
                         factor);
  }
  return {part_a && part_b, fmt::format("800 blocks: GRAPE 0.99 {:.4f} vs Retrace-LR 1.0 {:.4f} ({}); {} blocks asymptote{}",
                                        g_final, r_final, part_a ? "ok" : "not < 0.5x", blocks, pairs)};
}

ExperimentConfig control_config(const std::string& algo, std::vector<double> rates) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kFrozenLakeControl;
  c.algo = algo;
  (algo == "grape" ? c.alpha : c.eta) = std::move(rates);
  c.lambda = {0.0};
  c.n = {250};
  c.beta = {0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100};
  c.steps = 500'000;
  c.policy_period = 100'000;
  c.buffer_capacity = 500'000;
  c.trials = 4;
  c.seed = kSeed;
  return c;
}

Outcome frozenlake_control() {
  const ExperimentOutput grape = run_and_summarize(control_config("grape", {0.999}));
  const ExperimentOutput lr = run_and_summarize(control_config("retrace-lr", {0.1, 0.2, 0.5, 1.0}));
  const BetaChoice& g = grape.best_beta.at(0);
  const BetaChoice* best_lr = nullptr;
  std::string lr_detail;
  for (const BetaChoice& c : lr.best_beta) {
    if (!best_lr || c.final_mean > best_lr->final_mean) best_lr = &c;
    lr_detail += fmt::format(" eta={}:{:.3f}(beta={})", *c.key.eta, c.final_mean, c.beta);
  }
  const bool ok = g.final_mean >= best_lr->final_mean - 0.05;
  return {ok, fmt::format("GRAPE alpha=0.999 final mean {:.3f} (beta={}); Retrace-LR best {:.3f};{}", g.final_mean, g.beta,
                          best_lr->final_mean, lr_detail)};
}

Outcome error_decay_shape() {
  const double high0 = error_decay_coefficient(0.99, 0.5, 50, 0);
  const double low0 = error_decay_coefficient(0.0, 0.5, 50, 0);
  const double high_last = error_decay_coefficient(0.99, 0.5, 50, 49);
  const double low_last = error_decay_coefficient(0.0, 0.5, 50, 49);
  return {high0 > low0 && high_last < low_last,
          fmt::format("k=0: {:.3g} vs {:.3g}; k=49: {:.3g} vs {:.3g}", high0, low0, high_last, low_last)};
}

Outcome reuse_bound() {
  Rng rng = substream(kSeed, 13);
  int violations = 0;
  double tightest = 0.0;
  for (int i = 0; i < 100; ++i) {
    const RandomProblem p = random_problem(rng, pick_gamma(i));
    const BoundSides s = reuse_bound_sides(p.mdp, p.pi, p.mu, p.q);
    violations += s.lhs > s.rhs;
    tightest = std::max(tightest, s.lhs / s.rhs);
  }
  return {violations == 0, fmt::format("100 draws, {} violations, max lhs/rhs {:.3f}", violations, tightest)};
}

Outcome constant_error() {
  Rng rng = substream(kSeed, 14);
  struct Case {
    TabularMdp mdp;
    Policy pi;
    Policy mu;
    double lambda;
  };
  std::vector<Case> cases;
  cases.push_back({two_state_mdp(0.5), Policy::uniform(2, 2), skewed_two_state(), 0.0});
  for (int i = 0; i < 4; ++i) {
    RandomProblem p = random_problem(rng, i < 2 ? 0.5 : 0.9);
    cases.push_back({std::move(p.mdp), std::move(p.pi), std::move(p.mu), 0.5 * i / 1.5});
  }
  bool ok = true;
  double worst = 0.0;
  for (const Case& c : cases)
    for (double alpha : {0.0, 1.0}) {
      const AlgoParams p = params_for(c.mdp, alpha, c.lambda);
      const double bound = 2 * 0.1 / (1 - contraction_modulus(p));
      const double value = constant_error_asymptote(c.mdp, c.pi, c.mu, p, 0.1, 5000);
      ok = ok && value <= bound + 1e-6;
      worst = std::max(worst, value / bound);
    }
  return {ok, fmt::format("{} MDPs x alpha in {{0, 1}}, max value / bound {:.3f}", cases.size(), worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "grape_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"dp-noise", "dp-noise --env nchain --slip 0.2 --algo grape --alpha 0.9 --sigma 0 0.3 --iters 100 --trials 4 --seed 5"},
      {"error-decay", "error-decay --alpha 0 0.9 0.99 --delta 0.5 --K 50"},
      {"variance-limit", "variance-limit --alpha 0 0.99 --k 2000 --samples 20000 --seed 5"},
      {"nchain-eval", "nchain-eval --algo retrace-lr --eta 0.1 1 --slip 0.2 --blocks 50 --trials 4 --seed 5"},
      {"frozenlake-control",
       "frozenlake-control --algo grape --alpha 0.9 --beta 1 10 --steps 40000 --policy-period 10000 --trials 2 --seed 5"},
      {"verify", "verify --suite estimators --seed 5"},
  };
  int files = 0;
  std::string mismatched;
  bool ok = true;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / fmt::format("{}_{}", name, rep);
      fs::create_directories(dir);
      const bool writes_csv = name != "verify";
      const std::string cmd = fmt::format("\"{}\" {}{} > \"{}\" 2>&1", GRAPE_CLI_PATH, args,
                                          writes_csv ? fmt::format(" --out \"{}\"", dir.string()) : "",
                                          (dir / "stdout.txt").string());
      if (shell(cmd) != 0) {
        ok = false;
        mismatched += " " + name + "(exit)";
      }
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(dir))
        if (writes_csv ? entry.path().extension() == ".csv" : true) found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) outputs[rep] += f.filename().string() + "\n" + slurp(f);
      if (rep == 0) files += static_cast<int>(found.size());
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) {
      ok = false;
      mismatched += " " + name;
    }
  }
  fs::remove_all(root);
  return {ok, fmt::format("{} subcommands, {} output files compared byte for byte{}", commands.size(), files,
                          mismatched.empty() ? "" : "; differing:" + mismatched)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "GRAPE operator contracts toward Q^pi with modulus delta", 10, [] { return operator_contraction(true); }},
      {2, "Retrace contracts with modulus gamma, H with modulus delta", 10, [] { return operator_contraction(false); }},
      {3, "exact GRAPE fixed points and alpha=1 decay", 30, fixed_points},
      {4, "decomposition of Psi_K into G and H powers", 30, decomposition_identity},
      {5, "noisy error bound holds on every run", 60, noisy_error_bound},
      {6, "FrozenLake noisy Retrace DP: learns at sigma=0, stalls at sigma=0.8", 300, frozenlake_dp_noise},
      {7, "learning-rate bound, tight on one state", 5, lr_bound},
      {8, "variance of the averaged accumulated error", 30, variance_limit},
      {9, "sampled targets are unbiased for G + alpha Phi and R", 300, target_unbiasedness},
      {10, "NChain model-free evaluation against Retrace-LR", 900, nchain_model_free},
      {11, "FrozenLake control at 500k steps against Retrace-LR", 2700, frozenlake_control},
      {12, "error-decay coefficient shape", 1, error_decay_shape},
      {13, "initialization-reuse bound", 10, reuse_bound},
      {14, "constant-error asymptote", 30, constant_error},
      {15, "CLI output is byte-identical across reruns", 300, cli_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool passed = o.passed && in_budget;
    failures += !passed;
    std::cout << fmt::format("{} [{:2}] {} | {} | {:.1f}s of {:.0f}s{}\n", passed ? "PASS" : "FAIL", c.id, c.name, o.detail,
                             seconds, c.budget_seconds, in_budget ? "" : " (over budget)")
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
