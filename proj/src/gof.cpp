#include "rbb/gof.hpp"

#include <cmath>
#include <stdexcept>

#include "rbb/pmf.hpp"

namespace rbb {

namespace {

// Standard normal quantile (Acklam's rational approximation, relative
// error below 1.2e-9 — ample for test thresholds).
double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -normal_quantile(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

GofResult chi_square_against(const std::vector<std::int64_t>& hist,
                             const std::vector<double>& probs, double alpha) {
  std::int64_t n = 0;
  for (auto c : hist) n += c;
  if (n <= 0) throw std::invalid_argument("chi_square: empty histogram");

  // Pool cells from the right until every expected count is >= 5.
  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double exp_tail = static_cast<double>(n);
  double obs_tail = static_cast<double>(n);
  const std::size_t cells = std::max(hist.size(), probs.size());
  for (std::size_t k = 0; k < cells; ++k) {
    const double e = (k < probs.size() ? probs[k] : 0.0) * static_cast<double>(n);
    const double o =
        k < hist.size() ? static_cast<double>(hist[k]) : 0.0;
    if (e < 5.0 || exp_tail - e < 5.0) break;
    exp_counts.push_back(e);
    obs_counts.push_back(o);
    exp_tail -= e;
    obs_tail -= o;
  }
  exp_counts.push_back(exp_tail);
  obs_counts.push_back(obs_tail);

  double stat = 0.0;
  for (std::size_t k = 0; k < exp_counts.size(); ++k) {
    if (exp_counts[k] <= 0.0) continue;
    const double d = obs_counts[k] - exp_counts[k];
    stat += d * d / exp_counts[k];
  }
  const int df = static_cast<int>(exp_counts.size()) - 1;
  const double crit = chi_square_critical(std::max(df, 1), alpha);
  return {stat, crit, df, stat <= crit};
}

}  // namespace

double chi_square_critical(int df, double alpha) {
  if (df < 1) throw std::invalid_argument("chi_square_critical: df must be >= 1");
  const double z = normal_quantile(1.0 - alpha);
  const double k = static_cast<double>(df);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

GofResult poisson_chi_square(const std::vector<std::int64_t>& hist,
                             double mean, double alpha) {
  const Pmf pois = poisson_pmf(mean, 1e-15);
  return chi_square_against(hist, pois.weights, alpha);
}

GofResult pmf_chi_square(const std::vector<std::int64_t>& hist,
                         const std::vector<double>& expected_pmf,
                         double alpha) {
  return chi_square_against(hist, expected_pmf, alpha);
}

}  // namespace rbb
