#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grape {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class VerifySuite { kLemmas, kTheorems, kEstimators };

/// Parses "lemmas", "theorems" or "estimators"; throws std::invalid_argument otherwise.
VerifySuite parse_suite(const std::string& name);

/**
 * Randomized property checks on the exact operators (lemmas), the
 * convergence and error bounds (theorems), or the sampled targets and policy
 * update (estimators). Deterministic for a fixed seed.
 */
std::vector<CheckResult> run_verify_suite(VerifySuite suite, std::uint64_t seed);

}  // namespace grape
