#include "rbb/md1.hpp"

#include <cmath>
#include <stdexcept>

namespace rbb {

double rho_of_r(double r) {
  if (r < 0.0) throw std::invalid_argument("rho_of_r: negative r");
  return 1.0 + r - std::sqrt(1.0 + r * r);
}

std::complex<double> md1_char_fn(double rho, double x) {
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("md1_char_fn: requires 0 <= rho < 1");
  if (std::abs(std::remainder(x, 2.0 * M_PI)) < 1e-12)
    return {1.0, 0.0};
  const std::complex<double> eix = std::polar(1.0, x);
  const std::complex<double> g = std::exp(rho * (eix - 1.0));
  return (1.0 - rho) * (eix - 1.0) * g / (eix - g);
}

std::complex<double> pmf_char_fn(const Pmf& pmf, double x) {
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < pmf.support_size(); ++k)
    s += pmf.weights[k] * std::polar(1.0, x * static_cast<double>(k));
  return s;
}

DriftConstants drift_constants(double rho) {
  if (rho <= 0.0 || rho >= 1.0)
    throw std::invalid_argument("drift_constants: requires 0 < rho < 1");

  // g(lambda) = rho (e^lambda - 1) - lambda is 0 at 0, initially
  // decreasing (g'(0) = rho - 1 < 0) and convex, so it has a unique
  // positive root. Bracket it by doubling, then bisect.
  const auto g = [rho](double lambda) {
    return rho * std::expm1(lambda) - lambda;
  };
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (g(lo) > 0.0) lo /= 2.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double lambda_star = 0.5 * (lo + hi);

  DriftConstants out;
  out.lambda_star = lambda_star;
  out.lambda_rho = 0.5 * lambda_star;
  const double drift = rho * std::expm1(out.lambda_rho);  // rho (e^l - 1)
  out.gamma = 1.0 - std::exp(drift - out.lambda_rho);
  out.C = std::exp(drift);
  return out;
}

double chebyshev_chaos_bound(std::int64_t L, double delta, double pair_prob,
                             double rho_L) {
  if (L < 2) throw std::invalid_argument("chebyshev_chaos_bound: L must be >= 2");
  if (delta <= 0.0)
    throw std::invalid_argument("chebyshev_chaos_bound: delta must be > 0");
  return (1.0 / (delta * delta)) *
         (1.0 / (4.0 * static_cast<double>(L)) + pair_prob - rho_L * rho_L);
}

}  // namespace rbb
