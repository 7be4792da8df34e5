#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rbb/random.hpp"

namespace rbb {

// Occupancy vector of the L-bin system. The total ball count is fixed
// at construction and conserved by every step.
struct BinConfiguration {
  std::vector<std::int64_t> occupancies;

  BinConfiguration() = default;
  explicit BinConfiguration(std::vector<std::int64_t> occ)
      : occupancies(std::move(occ)) {
    if (occupancies.empty())
      throw std::invalid_argument("BinConfiguration: L must be >= 1");
    for (auto v : occupancies)
      if (v < 0) throw std::invalid_argument("BinConfiguration: negative count");
  }

  std::size_t bins() const { return occupancies.size(); }
  std::int64_t total() const {
    std::int64_t n = 0;
    for (auto v : occupancies) n += v;
    return n;
  }
  bool operator==(const BinConfiguration&) const = default;
};

// Indicator profile w of a configuration and the fraction of non-empty bins.
struct OccupancyProfile {
  std::vector<std::uint8_t> w;
  std::int64_t occupied;  // L * w_bar, an integer
  double w_bar;
};

OccupancyProfile occupancy_profile(const BinConfiguration& config);

// Number of non-empty bins without materializing w.
std::int64_t occupied_count(const BinConfiguration& config);

// Single-coordinate state of the nonlinear process or the M/D/1 queue.
struct ScalarState {
  std::int64_t count = 0;
};

// Joint trajectory of the nonlinear process and its dominating M/D/1
// queue, built by coupled_step so that eta[t] <= zeta[t] throughout.
struct CoupledPath {
  std::vector<ScalarState> eta;
  std::vector<ScalarState> zeta;
  std::int64_t horizon() const {
    return static_cast<std::int64_t>(eta.size()) - 1;
  }
};

// One parallel update: remove a ball from every non-empty bin, then
// reassign all removed balls by a uniform multinomial. Input is not
// mutated; the total is conserved.
BinConfiguration rbb_step(const BinConfiguration& config, RandomStream& rng);

// In-place variant for hot loops (no allocation).
void rbb_step_inplace(BinConfiguration& config, RandomStream& rng);

// One step of the nonlinear process: serve one ball if present, then
// add a Poisson(rho) arrival, where rho is the caller-supplied
// probability that the process is positive. Requires rho in [0,1].
ScalarState nonlinear_step(ScalarState state, double rho, RandomStream& rng);

// One step of the M/D/1 queue with fixed arrival rate rho >= 0.
ScalarState md1_step(ScalarState state, double rho, RandomStream& rng);

// Advance the coupled pair (eta, zeta) one step with shared arrivals:
// M ~ Poisson(r) feeds the queue, and the nonlinear side receives the
// Bernoulli(rho_t / r) thinning of M (marginally Poisson(rho_t)).
// Requires rho_t <= r < 1; preserves eta <= zeta.
std::pair<ScalarState, ScalarState> coupled_step(ScalarState eta,
                                                 ScalarState zeta,
                                                 double rho_t, double r,
                                                 RandomStream& rng);

// Drive rbb_step for T steps, pushing (t, state) to the recorder at
// every step including t = 0. The recorder must not mutate the state.
template <class Recorder>
void simulate_rbb(const BinConfiguration& initial, std::int64_t horizon,
                  RandomStream& rng, Recorder&& record) {
  if (horizon < 0) throw std::invalid_argument("simulate_rbb: negative horizon");
  BinConfiguration config = initial;
  record(std::int64_t{0}, static_cast<const BinConfiguration&>(config));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    rbb_step_inplace(config, rng);
    record(t, static_cast<const BinConfiguration&>(config));
  }
}

}  // namespace rbb
