#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rbb/pmf.hpp"
#include "rbb/processes.hpp"

namespace rbb {

// All occupancy vectors of length L summing to N, in lexicographic
// order. Fails if the count C(N+L-1, L-1) exceeds 10^6.
std::vector<BinConfiguration> enumerate_states(std::int64_t balls,
                                               std::int64_t bins);

// Exact one-step probability of the parallel update: with
// sigma = to - from + w(from), the probability is
// multinomial(L w_bar; sigma) / L^{L w_bar}, or 0 if sigma is invalid.
double transition_probability(const BinConfiguration& from,
                              const BinConfiguration& to);

// Enumerated state space with its row-stochastic transition matrix.
class ExactChain {
 public:
  ExactChain(std::int64_t balls, std::int64_t bins);

  std::int64_t balls() const { return balls_; }
  std::int64_t bins() const { return bins_; }
  const std::vector<BinConfiguration>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }

  std::size_t index_of(const BinConfiguration& state) const;
  const std::vector<std::vector<double>>& matrix() const { return matrix_; }

  // l1 norm of pi P - pi.
  double stationarity_residual(const std::vector<double>& pi) const;

 private:
  std::int64_t balls_;
  std::int64_t bins_;
  std::vector<BinConfiguration> states_;
  std::map<std::vector<std::int64_t>, std::size_t> index_;
  std::vector<std::vector<double>> matrix_;
};

// Stationary distribution: dense linear solve of the balance equations
// up to 10^4 states, power iteration above. Residual certified <= tol.
std::vector<double> stationary_rbb(const ExactChain& chain, double tol = 1e-12);

// Both sides of the stationary covariance identity
//   Cov(w_1, w_2) = -E(w_1)^2 + 2 E(w_1) ((r+1)L-1)/(L-1) - 2 r L/(L-1)
// with r = N/L, evaluated under the given stationary vector.
std::pair<double, double> stationary_covariance_identity(
    const ExactChain& chain, const std::vector<double>& stationary);

// Exact P(bin 1 and bin 2 both non-empty) and E(w_bar) under a
// distribution over the chain's states.
struct PairStats {
  double pair_prob;
  double rho;
};
PairStats exact_pair_stats(const ExactChain& chain,
                           const std::vector<double>& dist);

}  // namespace rbb
