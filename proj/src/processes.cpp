#include "rbb/processes.hpp"

namespace rbb {

OccupancyProfile occupancy_profile(const BinConfiguration& config) {
  OccupancyProfile prof;
  prof.w.resize(config.bins());
  prof.occupied = 0;
  for (std::size_t j = 0; j < config.bins(); ++j) {
    const bool occ = config.occupancies[j] > 0;
    prof.w[j] = occ ? 1 : 0;
    prof.occupied += occ ? 1 : 0;
  }
  prof.w_bar =
      static_cast<double>(prof.occupied) / static_cast<double>(config.bins());
  return prof;
}

std::int64_t occupied_count(const BinConfiguration& config) {
  std::int64_t n = 0;
  for (auto v : config.occupancies) n += (v > 0) ? 1 : 0;
  return n;
}

void rbb_step_inplace(BinConfiguration& config, RandomStream& rng) {
  const std::size_t L = config.bins();
  std::int64_t trials = 0;
  for (std::size_t j = 0; j < L; ++j) {
    if (config.occupancies[j] > 0) {
      --config.occupancies[j];
      ++trials;
    }
  }
  // Reassign the removed balls: sequential binomial conditioning gives
  // the uniform multinomial without a scratch buffer.
  std::int64_t remaining = trials;
  for (std::size_t j = 0; j < L && remaining > 0; ++j) {
    const std::int64_t k = (j + 1 == L)
                               ? remaining
                               : rng.binomial(remaining,
                                              1.0 / static_cast<double>(L - j));
    config.occupancies[j] += k;
    remaining -= k;
  }
}

BinConfiguration rbb_step(const BinConfiguration& config, RandomStream& rng) {
  BinConfiguration next = config;
  rbb_step_inplace(next, rng);
  return next;
}

ScalarState nonlinear_step(ScalarState state, double rho, RandomStream& rng) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("nonlinear_step: rho outside [0,1]");
  const std::int64_t served = state.count > 0 ? 1 : 0;
  return ScalarState{state.count - served + rng.poisson(rho)};
}

ScalarState md1_step(ScalarState state, double rho, RandomStream& rng) {
  if (rho < 0.0) throw std::invalid_argument("md1_step: negative rho");
  const std::int64_t served = state.count > 0 ? 1 : 0;
  return ScalarState{state.count - served + rng.poisson(rho)};
}

std::pair<ScalarState, ScalarState> coupled_step(ScalarState eta,
                                                 ScalarState zeta,
                                                 double rho_t, double r,
                                                 RandomStream& rng) {
  if (r >= 1.0) throw std::invalid_argument("coupled_step: r must be < 1");
  if (r < 0.0) throw std::invalid_argument("coupled_step: negative r");
  if (rho_t < 0.0 || rho_t > r)
    throw std::invalid_argument("coupled_step: requires 0 <= rho_t <= r");
  if (eta.count > zeta.count)
    throw std::invalid_argument("coupled_step: requires eta <= zeta");

  std::int64_t arrivals_queue = 0;
  std::int64_t arrivals_thin = 0;
  if (r > 0.0) {
    arrivals_queue = rng.poisson(r);
    const double mark = rho_t / r;
    for (std::int64_t k = 0; k < arrivals_queue; ++k)
      arrivals_thin += rng.bernoulli(mark) ? 1 : 0;
  }
  // r == 0 forces rho_t == 0 and both arrival counts stay 0.

  const std::int64_t eta_served = eta.count > 0 ? 1 : 0;
  const std::int64_t zeta_served = zeta.count > 0 ? 1 : 0;
  return {ScalarState{eta.count - eta_served + arrivals_thin},
          ScalarState{zeta.count - zeta_served + arrivals_queue}};
}

}  // namespace rbb
