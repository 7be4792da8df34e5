#pragma once

#include <cstdint>
#include <vector>

namespace rbb {

// Chi-square critical value by the Wilson-Hilferty approximation.
double chi_square_critical(int df, double alpha);

struct GofResult {
  double statistic;
  double critical;
  int df;
  bool pass;
};

// Chi-square goodness-of-fit of an observed histogram (counts of
// 0, 1, 2, ...) against Poisson(mean). Cells with expected count below
// 5 are pooled into the tail.
GofResult poisson_chi_square(const std::vector<std::int64_t>& hist,
                             double mean, double alpha = 1e-3);

// Same test against an arbitrary expected pmf over 0..n (tail pooled).
GofResult pmf_chi_square(const std::vector<std::int64_t>& hist,
                         const std::vector<double>& expected_pmf,
                         double alpha = 1e-3);

}  // namespace rbb
