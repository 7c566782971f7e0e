#ifndef OPKERNEL_SELFTEST_HPP
#define OPKERNEL_SELFTEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "opkernel/json_io.hpp"

namespace opkernel {

inline constexpr std::uint64_t kDefaultSeed = 424242;

struct CriterionResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;   // worst observed
  double tolerance = 0.0;  // the pinned bound
  std::string detail;
  double elapsed_ms = 0.0;
};

struct SelftestResult {
  std::vector<CriterionResult> criteria;
  bool all_pass = false;
  double total_ms = 0.0;
};

/**
 * Runs the full deterministic verification suite (seeded PRNG).  Each entry
 * is one acceptance criterion with its pinned tolerance.
 */
SelftestResult run_selftest(std::uint64_t seed = kDefaultSeed,
                            const Tolerance &tol = Tolerance{});

json selftest_report(const SelftestResult &result, std::uint64_t seed);

}  // namespace opkernel

#endif
