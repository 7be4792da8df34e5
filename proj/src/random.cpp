#include "rbb/random.hpp"

#include <cmath>

namespace rbb {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  // Mix the pair through splitmix64 twice so that neighbouring seeds or
  // ids still land in unrelated regions of the state space.
  std::uint64_t x = master_seed;
  std::uint64_t a = splitmix64(x);
  x ^= stream_id * 0xda942042e4dd58b5ull;
  x += splitmix64(x) ^ a;
  for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RandomStream::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0) return 0;
  std::int64_t total = 0;
  // Split large means so the inversion never underflows exp(-mean).
  while (mean > 30.0) {
    total += poisson(30.0);
    mean -= 30.0;
  }
  const double u = next_double();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0) break;  // deep in the tail; cdf has saturated
  }
  return total + k;
}

std::int64_t RandomStream::binomial(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: negative n");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const double pmf0 = std::exp(static_cast<double>(n) * std::log1p(-p));
  if (pmf0 == 0.0) {
    // (1-p)^n underflowed; fall back to explicit Bernoulli counting.
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }
  const double u = next_double();
  const double ratio = p / (1.0 - p);
  double pmf = pmf0;
  double cdf = pmf;
  std::int64_t k = 0;
  while (u >= cdf && k < n) {
    ++k;
    pmf *= ratio * static_cast<double>(n - k + 1) / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

void RandomStream::multinomial_uniform(std::int64_t trials,
                                       std::span<std::int64_t> out) {
  if (trials < 0) throw std::invalid_argument("multinomial: negative trials");
  const std::size_t L = out.size();
  std::int64_t remaining = trials;
  for (std::size_t j = 0; j < L; ++j) {
    const double p = 1.0 / static_cast<double>(L - j);
    const std::int64_t k = (j + 1 == L) ? remaining : binomial(remaining, p);
    out[j] = k;
    remaining -= k;
  }
}

}  // namespace rbb
