#pragma once

#include "grape/results.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grape {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n); zero for a single value.
  double stderr_mean = 0.0;
  double median = 0.0;
  double p025 = 0.0;
  double p975 = 0.0;
};

/// Quantile q in [0, 1] of ascending `sorted`, interpolating linearly between order statistics.
double percentile(std::span<const double> sorted, double q);

Summary summarize(std::span<const double> values);

/// Columns that may serve as grouping keys.
enum class GroupKey { kExperiment, kEnv, kAlpha, kLambda, kEta, kBeta, kSigma, kN };

/// Every grouping column.
std::vector<GroupKey> all_group_keys();

struct SummaryRow {
  /// Prototype carrying the group's key columns; trial and value are unused.
  ResultRow key;
  std::int64_t step = 0;
  std::string metric;
  Summary stats;
};

/**
 * Groups rows by the selected key columns plus (metric, step) and
 * summarizes each group across trials. Output follows the order in which
 * groups first appear. Throws on an empty input.
 */
std::vector<SummaryRow> aggregate(std::span<const ResultRow> rows, std::span<const GroupKey> group_keys);

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);

struct BetaChoice {
  /// Carries experiment, alpha or eta, lambda and N of the group.
  ResultRow key;
  double beta = 0.0;
  /// Mean over trials of the metric averaged over the final 20% of policy updates.
  double score = 0.0;
  double final_mean = 0.0;
};

/**
 * For each (experiment, alpha, eta, lambda, N) group of success-probability
 * rows, picks the beta with the highest mean over the final 20% of policy
 * updates. Ties go to the larger final mean, then to the smaller beta. When
 * `beta_grid` is given, every group must contain every listed beta.
 */
std::vector<BetaChoice> select_best_beta(std::span<const ResultRow> rows,
                                         std::optional<std::vector<double>> beta_grid = std::nullopt);

}  // namespace grape
