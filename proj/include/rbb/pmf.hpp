#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rbb {

// Numerical failure distinct from argument validation (the CLI maps
// these to different exit codes).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated probability mass function on {0, 1, 2, ...}. tail_bound is
// a certified upper bound on the mass above the stored support.
struct Pmf {
  std::vector<double> weights;
  double tail_bound = 0.0;

  Pmf() = default;
  explicit Pmf(std::vector<double> w, double tail = 0.0);

  std::size_t support_size() const { return weights.size(); }
  double operator[](std::size_t k) const {
    return k < weights.size() ? weights[k] : 0.0;
  }

  double sum() const;
  double mean() const;

  static Pmf delta(std::size_t k);
};

// Poisson(mean) truncated so the certified (Chernoff) tail is <= tail_tol.
Pmf poisson_pmf(double mean, double tail_tol = 1e-18);

// Total variation distance: half the l1 distance plus half the tail
// discrepancy carried by the truncations. Symmetric, in [0,1].
double tv_distance(const Pmf& p, const Pmf& q);

// Controls for exact law evolution.
struct EvolveOptions {
  double poisson_tail_tol = 1e-18;  // per-step arrival truncation
  double trim_eps = 1e-18;          // drop trailing weights below this
  std::size_t max_support = 200000;
};

// One exact step of the queue map: serve (shift mass at k>0 down by
// one, mass at 0 stays), then convolve with Poisson(rho).
Pmf queue_map_step(const Pmf& law, double rho, const EvolveOptions& opt = {});

// Exact law recursion of the nonlinear process: at each step the
// arrival rate is the law's own positive-mass rho(t) = 1 - P(0).
// Returns laws at t = 0..T.
std::vector<Pmf> nonlinear_pmf_evolve(const Pmf& initial, std::int64_t steps,
                                      const EvolveOptions& opt = {});

// M/D/1 law evolution at fixed arrival rate rho; returns laws at t = 0..T.
std::vector<Pmf> md1_pmf_evolve(const Pmf& initial, double rho,
                                std::int64_t steps,
                                const EvolveOptions& opt = {});

// Stationary pmf of the M/D/1 queue with arrival rate rho < 1, from the
// balance-equation forward recursion with pi_0 = 1 - rho. Fails if the
// tail above n_max exceeds tail_tol.
Pmf md1_stationary_pmf(double rho, std::size_t n_max,
                       double tail_tol = 1e-12);

}  // namespace rbb
