#include "grape/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace grape {

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty group");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  Summary s;
  s.n = sorted.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_mean = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  s.median = percentile(sorted, 0.5);
  s.p025 = percentile(sorted, 0.025);
  s.p975 = percentile(sorted, 0.975);
  return s;
}

std::vector<GroupKey> all_group_keys() {
  return {GroupKey::kExperiment, GroupKey::kEnv,  GroupKey::kAlpha, GroupKey::kLambda,
          GroupKey::kEta,        GroupKey::kBeta, GroupKey::kSigma, GroupKey::kN};
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

// Copies the selected key columns of `row` into a fresh prototype and returns its text key.
std::string project(const ResultRow& row, std::span<const GroupKey> keys, ResultRow& proto) {
  std::string text;
  for (GroupKey k : keys) {
    switch (k) {
      case GroupKey::kExperiment: proto.experiment = row.experiment; text += row.experiment; break;
      case GroupKey::kEnv: proto.env = row.env; text += row.env; break;
      case GroupKey::kAlpha: proto.alpha = row.alpha; text += opt(row.alpha); break;
      case GroupKey::kLambda: proto.lambda = row.lambda; text += opt(row.lambda); break;
      case GroupKey::kEta: proto.eta = row.eta; text += opt(row.eta); break;
      case GroupKey::kBeta: proto.beta = row.beta; text += opt(row.beta); break;
      case GroupKey::kSigma: proto.sigma = row.sigma; text += opt(row.sigma); break;
      case GroupKey::kN: proto.n = row.n; text += row.n ? std::to_string(*row.n) : std::string(); break;
    }
    text += '\x1f';
  }
  return text;
}

}  // namespace

std::vector<SummaryRow> aggregate(std::span<const ResultRow> rows, std::span<const GroupKey> group_keys) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  std::unordered_map<std::string, std::size_t> index;
  for (const ResultRow& row : rows) {
    ResultRow proto;
    std::string key = project(row, group_keys, proto);
    key += row.metric;
    key += '\x1f';
    key += std::to_string(row.step);
    auto [it, inserted] = index.try_emplace(std::move(key), out.size());
    if (inserted) {
      SummaryRow s;
      proto.metric = row.metric;
      proto.step = row.step;
      s.key = std::move(proto);
      s.step = row.step;
      s.metric = row.metric;
      out.push_back(std::move(s));
      values.emplace_back();
    }
    values[it->second].push_back(row.value);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].stats = summarize(values[i]);
  return out;
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "experiment,env,alpha,lambda,eta,beta,sigma,N,step,metric,n,mean,stderr,median,p2.5,p97.5\n";
  for (const SummaryRow& s : rows) {
    const ResultRow& k = s.key;
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", k.experiment, k.env, opt(k.alpha),
                      opt(k.lambda), opt(k.eta), opt(k.beta), opt(k.sigma),
                      k.n ? std::to_string(*k.n) : std::string(), s.step, s.metric, s.stats.n,
                      format_real(s.stats.mean), format_real(s.stats.stderr_mean),
                      format_real(s.stats.median), format_real(s.stats.p025), format_real(s.stats.p975));
  }
}

std::vector<BetaChoice> select_best_beta(std::span<const ResultRow> rows,
                                         std::optional<std::vector<double>> beta_grid) {
  if (rows.empty()) throw std::invalid_argument("select_best_beta: no rows");
  static constexpr GroupKey kKeys[] = {GroupKey::kExperiment, GroupKey::kAlpha, GroupKey::kEta,
                                       GroupKey::kLambda, GroupKey::kN};

  struct Candidate {
    std::int64_t last_step = 0;
    // step -> values across trials
    std::map<std::int64_t, std::vector<double>> by_step;
  };
  struct Group {
    ResultRow key;
    std::map<double, Candidate> by_beta;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const ResultRow& row : rows) {
    if (!row.beta) throw std::invalid_argument("select_best_beta: row without beta");
    ResultRow proto;
    const std::string key = project(row, kKeys, proto);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back({std::move(proto), {}});
    Candidate& c = groups[it->second].by_beta[*row.beta];
    c.by_step[row.step].push_back(row.value);
    c.last_step = std::max(c.last_step, row.step);
  }

  std::vector<BetaChoice> out;
  for (const Group& g : groups) {
    if (beta_grid) {
      for (double b : *beta_grid) {
        if (!g.by_beta.contains(b)) {
          throw std::invalid_argument(fmt::format("select_best_beta: beta {} missing for a group", format_real(b)));
        }
      }
    }
    std::optional<BetaChoice> best;
    for (const auto& [beta, c] : g.by_beta) {
      const std::int64_t tail = static_cast<std::int64_t>(std::ceil(0.2 * static_cast<double>(c.last_step)));
      const std::int64_t first = c.last_step == 0 ? 0 : c.last_step - std::max<std::int64_t>(tail, 1) + 1;
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& [step, vals] : c.by_step) {
        if (step < first) continue;
        for (double v : vals) sum += v;
        count += vals.size();
      }
      const std::vector<double>& final_vals = c.by_step.at(c.last_step);
      double final_sum = 0.0;
      for (double v : final_vals) final_sum += v;

      BetaChoice choice;
      choice.key = g.key;
      choice.beta = beta;
      choice.score = sum / static_cast<double>(count);
      choice.final_mean = final_sum / static_cast<double>(final_vals.size());
      // Betas are visited in increasing order, so strict comparisons keep the smaller beta on exact ties.
      if (!best || std::tie(choice.score, choice.final_mean) > std::tie(best->score, best->final_mean)) {
        best = choice;
      }
    }
    out.push_back(*best);
  }
  return out;
}

}  // namespace grape
