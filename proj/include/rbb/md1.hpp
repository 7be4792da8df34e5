#pragma once

#include <complex>

#include "rbb/pmf.hpp"

namespace rbb {

// The unique arrival rate whose stationary M/D/1 mean queue length is r.
// rho_of_r(r) = 1 + r - sqrt(1 + r^2), always in [0, 1) for r >= 0.
double rho_of_r(double r);

// Closed-form characteristic function of the stationary M/D/1 law:
//   (1 - rho)(e^{ix} - 1) exp(rho (e^{ix} - 1)) / (e^{ix} - exp(rho (e^{ix} - 1))).
// At x = 0 (mod 2 pi) the removable singularity evaluates to 1.
std::complex<double> md1_char_fn(double rho, double x);

// Discrete transform sum_k pmf[k] e^{ikx} of a truncated pmf.
std::complex<double> pmf_char_fn(const Pmf& pmf, double x);

// Geometric drift constants for f(z) = e^{lambda z} under the M/D/1
// map: P f - f <= -gamma f + C with
//   gamma = 1 - exp(rho (e^{lambda} - 1) - lambda),
//   C     = exp(rho (e^{lambda} - 1)),
// valid whenever rho (e^{lambda} - 1) < lambda. lambda_star is the
// positive root of rho (e^{lambda} - 1) = lambda; lambda_rho is taken
// at lambda_star / 2 for margin.
struct DriftConstants {
  double lambda_rho;
  double lambda_star;
  double gamma;
  double C;
};

DriftConstants drift_constants(double rho);

// Chebyshev bound on P(|w_bar_L - rho_L| > delta):
//   (1 / delta^2) (1/(4L) + pair_prob - rho_L^2).
double chebyshev_chaos_bound(std::int64_t L, double delta, double pair_prob,
                             double rho_L);

}  // namespace rbb
