#include "rbb/pmf.hpp"

#include <algorithm>
#include <cmath>

namespace rbb {

Pmf::Pmf(std::vector<double> w, double tail) : weights(std::move(w)), tail_bound(tail) {
  if (tail < 0.0) throw std::invalid_argument("Pmf: negative tail bound");
  for (double x : weights)
    if (x < 0.0 || !std::isfinite(x))
      throw std::invalid_argument("Pmf: weights must be nonnegative and finite");
}

double Pmf::sum() const {
  double s = 0.0;
  for (double x : weights) s += x;
  return s;
}

double Pmf::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < weights.size(); ++k)
    m += static_cast<double>(k) * weights[k];
  return m;
}

Pmf Pmf::delta(std::size_t k) {
  std::vector<double> w(k + 1, 0.0);
  w[k] = 1.0;
  return Pmf(std::move(w), 0.0);
}

Pmf poisson_pmf(double mean, double tail_tol) {
  if (mean < 0.0) throw std::invalid_argument("poisson_pmf: negative mean");
  if (mean == 0.0) return Pmf::delta(0);
  std::vector<double> w;
  double p = std::exp(-mean);
  double sum = 0.0;
  std::size_t k = 0;
  while (true) {
    w.push_back(p);
    sum += p;
    // Chernoff tail: P(X > k) <= exp(-mean) (e mean / (k+1))^(k+1) for k+1 > mean.
    if (static_cast<double>(k + 1) > mean) {
      const double n = static_cast<double>(k + 1);
      const double log_tail = -mean + n * (1.0 + std::log(mean) - std::log(n));
      if (log_tail <= std::log(tail_tol)) break;
    }
    ++k;
    p *= mean / static_cast<double>(k);
    if (k > 100000) throw NumericalError("poisson_pmf: truncation runaway");
  }
  return Pmf(std::move(w), std::max(0.0, 1.0 - sum));
}

double tv_distance(const Pmf& p, const Pmf& q) {
  const std::size_t n = std::max(p.support_size(), q.support_size());
  double l1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) l1 += std::abs(p[k] - q[k]);
  return 0.5 * l1 + 0.5 * (p.tail_bound + q.tail_bound);
}

namespace {

// Serve one customer: mass at 0 stays, mass at k > 0 moves to k - 1.
std::vector<double> serve(const std::vector<double>& w) {
  if (w.size() <= 1) return w;
  std::vector<double> out(w.size() - 1, 0.0);
  out[0] = w[0] + w[1];
  for (std::size_t k = 2; k < w.size(); ++k) out[k - 1] = w[k];
  return out;
}

}  // namespace

Pmf queue_map_step(const Pmf& law, double rho, const EvolveOptions& opt) {
  if (rho < 0.0) throw std::invalid_argument("queue_map_step: negative rho");
  std::vector<double> served = serve(law.weights);
  double tail = law.tail_bound;

  std::vector<double> out;
  if (rho == 0.0) {
    out = std::move(served);
  } else {
    const Pmf arrivals = poisson_pmf(rho, opt.poisson_tail_tol);
    tail += arrivals.tail_bound;
    out.assign(served.size() + arrivals.support_size() - 1, 0.0);
    for (std::size_t i = 0; i < served.size(); ++i) {
      if (served[i] == 0.0) continue;
      for (std::size_t j = 0; j < arrivals.support_size(); ++j)
        out[i + j] += served[i] * arrivals.weights[j];
    }
  }

  // Trim the trailing sliver into the tail bound.
  double trailing = 0.0;
  while (out.size() > 1 && trailing + out.back() < opt.trim_eps) {
    trailing += out.back();
    out.pop_back();
  }
  tail += trailing;

  if (out.size() > opt.max_support)
    throw NumericalError("queue_map_step: truncation budget exceeded");
  return Pmf(std::move(out), tail);
}

std::vector<Pmf> nonlinear_pmf_evolve(const Pmf& initial, std::int64_t steps,
                                      const EvolveOptions& opt) {
  if (steps < 0) throw std::invalid_argument("nonlinear_pmf_evolve: negative steps");
  std::vector<Pmf> laws;
  laws.reserve(static_cast<std::size_t>(steps) + 1);
  laws.push_back(initial);
  for (std::int64_t t = 0; t < steps; ++t) {
    const Pmf& cur = laws.back();
    const double rho = std::clamp(1.0 - cur[0], 0.0, 1.0);
    laws.push_back(queue_map_step(cur, rho, opt));
  }
  return laws;
}

std::vector<Pmf> md1_pmf_evolve(const Pmf& initial, double rho,
                                std::int64_t steps, const EvolveOptions& opt) {
  if (steps < 0) throw std::invalid_argument("md1_pmf_evolve: negative steps");
  if (rho < 0.0) throw std::invalid_argument("md1_pmf_evolve: negative rho");
  std::vector<Pmf> laws;
  laws.reserve(static_cast<std::size_t>(steps) + 1);
  laws.push_back(initial);
  for (std::int64_t t = 0; t < steps; ++t)
    laws.push_back(queue_map_step(laws.back(), rho, opt));
  return laws;
}

Pmf md1_stationary_pmf(double rho, std::size_t n_max, double tail_tol) {
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("md1_stationary_pmf: requires 0 <= rho < 1");

  // Arrival pmf a_j = e^{-rho} rho^j / j!, as far as the recursion needs it.
  std::vector<double> a(n_max + 2, 0.0);
  a[0] = std::exp(-rho);
  for (std::size_t j = 1; j < a.size(); ++j)
    a[j] = a[j - 1] * rho / static_cast<double>(j);

  // Balance equations of the serve-then-arrive map:
  //   pi_n = pi_0 a_n + sum_{k=1}^{n+1} pi_k a_{n-k+1},
  // solved forward for pi_{n+1} from pi_0 = 1 - rho.
  std::vector<double> pi;
  pi.reserve(n_max + 1);
  pi.push_back(1.0 - rho);
  double cum = pi[0];
  while (pi.size() <= n_max && 1.0 - cum > tail_tol) {
    const std::size_t n = pi.size() - 1;
    double rhs = pi[n] - pi[0] * a[n];
    for (std::size_t k = 1; k <= n; ++k) rhs -= pi[k] * a[n - k + 1];
    double next = rhs / a[0];
    if (next < 0.0) {
      if (next < -1e-10)
        throw NumericalError("md1_stationary_pmf: recursion lost positivity");
      next = 0.0;
    }
    pi.push_back(next);
    cum += next;
  }
  const double tail = std::max(0.0, 1.0 - cum);
  if (tail > tail_tol)
    throw NumericalError("md1_stationary_pmf: tail mass above tolerance at n_max");
  return Pmf(std::move(pi), tail);
}

}  // namespace rbb
