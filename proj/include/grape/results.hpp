#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grape {

/// One metric observation. Parameters that do not apply to the run stay empty.
struct ResultRow {
  std::string experiment;
  std::string env;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> eta;
  std::optional<double> beta;
  std::optional<double> sigma;
  std::optional<std::int64_t> n;
  std::int64_t trial = 0;
  std::int64_t step = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kCsvHeader =
    "experiment,env,alpha,lambda,eta,beta,sigma,N,trial,step,metric,value";

/// Decimal text with 17 significant digits, which parses back to the same double.
std::string format_real(double v);

void write_csv(std::ostream& os, std::span<const ResultRow> rows);
std::vector<ResultRow> read_csv(std::istream& is);

void write_csv_file(const std::filesystem::path& path, std::span<const ResultRow> rows);
std::vector<ResultRow> read_csv_file(const std::filesystem::path& path);

}  // namespace grape
