// Acceptance suite: runs every verification criterion at its pinned
// tolerance and prints one pass/fail line per criterion.

#include <cstdio>

#include "opkernel/selftest.hpp"

int main() {
  const opkernel::SelftestResult result = opkernel::run_selftest();
  int index = 0;
  for (const auto &c : result.criteria) {
    std::printf("[%s] %2d. %s  (residual %.3e, tolerance %.1e, %.0f ms)%s%s\n",
                c.pass ? "PASS" : "FAIL", ++index, c.name.c_str(), c.residual,
                c.tolerance, c.elapsed_ms, c.detail.empty() ? "" : " -- ",
                c.detail.c_str());
  }
  std::printf("%s: %zu criteria in %.1f s\n",
              result.all_pass ? "ALL PASS" : "FAILURES PRESENT",
              result.criteria.size(), result.total_ms / 1000.0);
  return result.all_pass ? 0 : 1;
}
