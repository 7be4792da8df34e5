#pragma once

#include <string>

#include "rbb/pmf.hpp"

namespace rbb {

inline constexpr const char* kVersion = "rbb-toolkit 1.0.0";

// Parse an initial-law spec: "delta:k", "mix:p0,p1,...", "poisson:mean".
Pmf parse_pmf_spec(const std::string& spec);

// Full command-line entry point. Returns 0 on success, 1 on validation
// errors, 2 on numerical failures.
int run_cli(int argc, const char* const* argv);

}  // namespace rbb
