#include "rbb/exact_chain.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace rbb {

namespace {

double binomial_count(std::int64_t n, std::int64_t k) {
  // C(n, k) as a double; exact for the small systems we enumerate.
  double c = 1.0;
  for (std::int64_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// multinomial(n; sigma) / L^n, exact for small n.
double multinomial_over_Ln(std::int64_t n,
                           const std::vector<std::int64_t>& sigma,
                           std::int64_t L) {
  double coeff = 1.0;
  std::int64_t rest = n;
  for (auto s : sigma) {
    coeff *= binomial_count(rest, s);
    rest -= s;
  }
  return coeff / std::pow(static_cast<double>(L), static_cast<double>(n));
}

void enumerate_rec(std::int64_t remaining, std::size_t pos,
                   std::vector<std::int64_t>& buf,
                   std::vector<BinConfiguration>& out) {
  if (pos + 1 == buf.size()) {
    buf[pos] = remaining;
    out.emplace_back(buf);
    return;
  }
  for (std::int64_t v = 0; v <= remaining; ++v) {
    buf[pos] = v;
    enumerate_rec(remaining - v, pos + 1, buf, out);
  }
}

}  // namespace

std::vector<BinConfiguration> enumerate_states(std::int64_t balls,
                                               std::int64_t bins) {
  if (balls < 0) throw std::invalid_argument("enumerate_states: negative N");
  if (bins < 1 || bins > 10)
    throw std::invalid_argument("enumerate_states: L must be in [1, 10]");
  const double count = binomial_count(balls + bins - 1, bins - 1);
  if (count > 1e6)
    throw std::invalid_argument("enumerate_states: state space above 10^6");
  std::vector<BinConfiguration> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::int64_t> buf(static_cast<std::size_t>(bins), 0);
  enumerate_rec(balls, 0, buf, out);
  return out;
}

double transition_probability(const BinConfiguration& from,
                              const BinConfiguration& to) {
  if (from.bins() != to.bins() || from.total() != to.total())
    throw std::invalid_argument("transition_probability: mismatched (N, L)");
  const std::int64_t L = static_cast<std::int64_t>(from.bins());
  const std::int64_t n = occupied_count(from);
  std::vector<std::int64_t> sigma(from.bins());
  for (std::size_t j = 0; j < from.bins(); ++j) {
    const std::int64_t w = from.occupancies[j] > 0 ? 1 : 0;
    sigma[j] = to.occupancies[j] - from.occupancies[j] + w;
    if (sigma[j] < 0) return 0.0;
  }
  // sum(sigma) == n follows from equal totals.
  return multinomial_over_Ln(n, sigma, L);
}

ExactChain::ExactChain(std::int64_t balls, std::int64_t bins)
    : balls_(balls), bins_(bins), states_(enumerate_states(balls, bins)) {
  if (states_.size() > 20000)
    throw std::invalid_argument("ExactChain: dense matrix too large");
  for (std::size_t i = 0; i < states_.size(); ++i)
    index_[states_[i].occupancies] = i;

  matrix_.assign(states_.size(), std::vector<double>(states_.size(), 0.0));
  const std::size_t L = static_cast<std::size_t>(bins_);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const BinConfiguration& from = states_[i];
    const std::int64_t n = occupied_count(from);
    std::vector<std::int64_t> base(L);
    for (std::size_t j = 0; j < L; ++j)
      base[j] = from.occupancies[j] - (from.occupancies[j] > 0 ? 1 : 0);

    // Walk the compositions sigma of n into L parts.
    std::vector<std::int64_t> sigma(L, 0);
    std::vector<std::int64_t> target(L);
    const auto emit = [&]() {
      for (std::size_t j = 0; j < L; ++j) target[j] = base[j] + sigma[j];
      const double p = multinomial_over_Ln(n, sigma, bins_);
      matrix_[i][index_.at(target)] += p;
    };
    const auto rec = [&](auto&& self, std::int64_t remaining,
                         std::size_t pos) -> void {
      if (pos + 1 == L) {
        sigma[pos] = remaining;
        emit();
        return;
      }
      for (std::int64_t v = 0; v <= remaining; ++v) {
        sigma[pos] = v;
        self(self, remaining - v, pos + 1);
      }
    };
    rec(rec, n, 0);
  }
}

std::size_t ExactChain::index_of(const BinConfiguration& state) const {
  const auto it = index_.find(state.occupancies);
  if (it == index_.end())
    throw std::invalid_argument("ExactChain: state not in chain");
  return it->second;
}

double ExactChain::stationarity_residual(const std::vector<double>& pi) const {
  double res = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    double pj = 0.0;
    for (std::size_t i = 0; i < size(); ++i) pj += pi[i] * matrix_[i][j];
    res += std::abs(pj - pi[j]);
  }
  return res;
}

std::vector<double> stationary_rbb(const ExactChain& chain, double tol) {
  const std::size_t n = chain.size();
  if (n == 1) return {1.0};

  std::vector<double> pi(n, 0.0);
  if (n <= 10000) {
    // Dense solve: (P^T - I) pi = 0 with the last equation replaced by
    // the normalization sum(pi) = 1.
    Eigen::MatrixXd A(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            chain.matrix()[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j)
      A(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(j)) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    b(static_cast<Eigen::Index>(n - 1)) = 1.0;
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    for (std::size_t i = 0; i < n; ++i)
      pi[i] = std::max(0.0, x(static_cast<Eigen::Index>(i)));
  } else {
    // Power iteration fallback.
    std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    for (std::int64_t it = 0; it < 1000000; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          next[j] += pi[i] * chain.matrix()[i][j];
      double diff = 0.0;
      for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
      pi.swap(next);
      if (diff <= tol) break;
    }
  }

  double s = 0.0;
  for (double x : pi) s += x;
  for (double& x : pi) x /= s;
  if (chain.stationarity_residual(pi) > tol)
    throw NumericalError("stationary_rbb: residual above tolerance");
  return pi;
}

std::pair<double, double> stationary_covariance_identity(
    const ExactChain& chain, const std::vector<double>& stationary) {
  if (chain.bins() < 2)
    throw std::invalid_argument("stationary_covariance_identity: L must be >= 2");
  double e_w1 = 0.0, e_w2 = 0.0, e_w1w2 = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& occ = chain.states()[i].occupancies;
    const double w1 = occ[0] > 0 ? 1.0 : 0.0;
    const double w2 = occ[1] > 0 ? 1.0 : 0.0;
    e_w1 += stationary[i] * w1;
    e_w2 += stationary[i] * w2;
    e_w1w2 += stationary[i] * w1 * w2;
  }
  const double lhs = e_w1w2 - e_w1 * e_w2;
  const double L = static_cast<double>(chain.bins());
  const double r = static_cast<double>(chain.balls()) / L;
  const double rhs = -e_w1 * e_w1 +
                     2.0 * e_w1 * ((r + 1.0) * L - 1.0) / (L - 1.0) -
                     2.0 * r * L / (L - 1.0);
  return {lhs, rhs};
}

PairStats exact_pair_stats(const ExactChain& chain,
                           const std::vector<double>& dist) {
  PairStats out{0.0, 0.0};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& occ = chain.states()[i].occupancies;
    if (occ.size() >= 2 && occ[0] > 0 && occ[1] > 0) out.pair_prob += dist[i];
    out.rho += dist[i] *
               static_cast<double>(occupied_count(chain.states()[i])) /
               static_cast<double>(chain.bins());
  }
  return out;
}

}  // namespace rbb
