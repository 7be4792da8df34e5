#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rbb {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

// Run the full verification suite (12 criteria). Deterministic given
// the seed; `threads` must not change any result.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed,
                                            int threads = 1);

}  // namespace rbb
