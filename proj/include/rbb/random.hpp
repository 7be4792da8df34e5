#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rbb {

// Seeded, splittable random stream. A stream is identified by
// (master_seed, stream_id); the same pair always reproduces the same
// draws bit-for-bit, independently of which thread runs it. Replica
// drivers derive one substream per replica so results do not depend on
// scheduling.
//
// Core generator: xoshiro256++ seeded through splitmix64, so distinct
// stream ids give well-separated states.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  // Derive the substream at the given offset from this stream's id.
  // Drivers hand out disjoint id blocks, so replica streams never
  // collide regardless of scheduling.
  RandomStream substream(std::uint64_t offset) const {
    return RandomStream(master_seed_, stream_id_ + offset);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double next_double();

  bool bernoulli(double p) { return next_double() < p; }

  // Poisson draw by sequential inversion. Exact for any mean; means
  // above 30 are split into chunks and summed (Poisson additivity), so
  // no approximate large-mean sampler is involved. mean == 0 gives the
  // constant 0.
  std::int64_t poisson(double mean);

  // Binomial(n, p) by CDF inversion from k = 0. Expected cost O(n p).
  std::int64_t binomial(std::int64_t n, double p);

  // Multinomial(trials; 1/L, ..., 1/L) into out (length L), by
  // sequential binomial conditioning: bin j receives
  // Binomial(remaining, 1/(L-j)).
  void multinomial_uniform(std::int64_t trials, std::span<std::int64_t> out);

 private:
  std::uint64_t state_[4];
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
};

}  // namespace rbb
