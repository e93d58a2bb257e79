#include "grape/results.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace grape {

namespace {

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

double parse_real(const std::string& field, const char* column) {
  // strtod rather than stod: subnormal values set ERANGE but still parse exactly.
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(field.c_str(), &end);
  const bool overflow = errno == ERANGE && std::isinf(v);
  if (field.empty() || std::isspace(static_cast<unsigned char>(field.front())) || end != field.c_str() + field.size() ||
      overflow) {
    throw std::runtime_error(fmt::format("csv: bad number '{}' in column {}", field, column));
  }
  return v;
}

std::int64_t parse_int(const std::string& field, const char* column) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error(fmt::format("csv: bad integer '{}' in column {}", field, column));
  }
  return v;
}

std::optional<double> parse_optional_real(const std::string& field, const char* column) {
  if (field.empty()) return std::nullopt;
  return parse_real(field, column);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

void write_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.experiment, r.env, optional_real(r.alpha),
                      optional_real(r.lambda), optional_real(r.eta), optional_real(r.beta),
                      optional_real(r.sigma), r.n ? std::to_string(*r.n) : std::string(), r.trial,
                      r.step, r.metric, format_real(r.value));
  }
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("csv: missing or unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 12) throw std::runtime_error(fmt::format("csv: expected 12 fields, got {}", f.size()));
    ResultRow r;
    r.experiment = f[0];
    r.env = f[1];
    r.alpha = parse_optional_real(f[2], "alpha");
    r.lambda = parse_optional_real(f[3], "lambda");
    r.eta = parse_optional_real(f[4], "eta");
    r.beta = parse_optional_real(f[5], "beta");
    r.sigma = parse_optional_real(f[6], "sigma");
    if (!f[7].empty()) r.n = parse_int(f[7], "N");
    r.trial = parse_int(f[8], "trial");
    r.step = parse_int(f[9], "step");
    r.metric = f[10];
    r.value = parse_real(f[11], "value");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_csv_file(const std::filesystem::path& path, std::span<const ResultRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  write_csv(os, rows);
  if (!os) throw std::runtime_error(fmt::format("write to {} failed", path.string()));
}

std::vector<ResultRow> read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return read_csv(is);
}

}  // namespace grape
