#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "rbb/gof.hpp"
#include "rbb/processes.hpp"

using namespace rbb;

TEST_CASE("empty configuration is a fixed point") {
  RandomStream rng(1);
  const BinConfiguration zero({0, 0, 0});
  for (int i = 0; i < 50; ++i)
    CHECK(rbb_step(zero, rng).occupancies == std::vector<std::int64_t>{0, 0, 0});
}

TEST_CASE("one-step law from (1,1) is {1/4, 1/2, 1/4}") {
  RandomStream rng(2);
  const BinConfiguration start({1, 1});
  const int n = 1000000;
  std::map<std::vector<std::int64_t>, int> counts;
  for (int i = 0; i < n; ++i) ++counts[rbb_step(start, rng).occupancies];
  // All 2^2 equally likely ball placements: (2,0) and (0,2) each 1/4.
  const double se25 = std::sqrt(0.25 * 0.75 / n);
  const double se50 = std::sqrt(0.25 / n);
  CHECK(std::abs(counts[{2, 0}] / double(n) - 0.25) < 3 * se25);
  CHECK(std::abs(counts[{1, 1}] / double(n) - 0.50) < 3 * se50);
  CHECK(std::abs(counts[{0, 2}] / double(n) - 0.25) < 3 * se25);
}

TEST_CASE("one-step law from (3,0,0): single trial uniform over bins") {
  RandomStream rng(3);
  const BinConfiguration start({3, 0, 0});
  const int n = 300000;
  std::map<std::vector<std::int64_t>, int> counts;
  for (int i = 0; i < n; ++i) ++counts[rbb_step(start, rng).occupancies];
  REQUIRE(counts.size() == 3);
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n);
  for (const auto& occ : {std::vector<std::int64_t>{3, 0, 0}, {2, 1, 0}, {2, 0, 1}})
    CHECK(std::abs(counts[occ] / double(n) - 1.0 / 3.0) < 3 * se);
}

TEST_CASE("ball conservation across random trajectories") {
  RandomStream rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::int64_t> occ(6);
    for (auto& v : occ) v = rng.poisson(1.5);
    BinConfiguration config(occ);
    const std::int64_t total = config.total();
    for (int t = 0; t < 200; ++t) {
      rbb_step_inplace(config, rng);
      REQUIRE(config.total() == total);
    }
  }
}

TEST_CASE("occupancy profile") {
  const auto prof = occupancy_profile(BinConfiguration({2, 0, 1, 0}));
  CHECK(prof.w == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(prof.occupied == 2);
  CHECK(prof.w_bar == 0.5);
}

TEST_CASE("nonlinear step: deterministic service when rho = 0") {
  RandomStream rng(5);
  CHECK(nonlinear_step(ScalarState{5}, 0.0, rng).count == 4);
  CHECK(nonlinear_step(ScalarState{0}, 0.0, rng).count == 0);
  CHECK_THROWS_AS(nonlinear_step(ScalarState{1}, 1.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(nonlinear_step(ScalarState{1}, -0.1, rng),
                  std::invalid_argument);
}

TEST_CASE("nonlinear step from 0 draws Poisson(rho) arrivals") {
  RandomStream rng(6);
  std::vector<std::int64_t> hist;
  for (int i = 0; i < 1000000; ++i) {
    const auto k = static_cast<std::size_t>(
        nonlinear_step(ScalarState{0}, 0.5, rng).count);
    if (k >= hist.size()) hist.resize(k + 1, 0);
    ++hist[k];
  }
  CHECK(poisson_chi_square(hist, 0.5, 1e-3).pass);
}

TEST_CASE("md1 step basics and drift from a large state") {
  RandomStream rng(7);
  CHECK(md1_step(ScalarState{3}, 0.0, rng).count == 2);
  CHECK_THROWS_AS(md1_step(ScalarState{3}, -1.0, rng), std::invalid_argument);

  // From a huge state the queue never idles, so the mean increment per
  // step is rho - 1.
  const double rho = 0.7;
  const int n = 100000;
  ScalarState state{1000000};
  for (int t = 0; t < n; ++t) state = md1_step(state, rho, rng);
  const double drift = (static_cast<double>(state.count) - 1000000.0) / n;
  CHECK(std::abs(drift - (rho - 1.0)) < 3.0 * std::sqrt(rho / n));
}

TEST_CASE("coupled step validation and degenerate cases") {
  RandomStream rng(8);
  CHECK_THROWS_AS(coupled_step(ScalarState{0}, ScalarState{0}, 0.6, 0.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(coupled_step(ScalarState{0}, ScalarState{0}, 0.5, 1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(coupled_step(ScalarState{3}, ScalarState{1}, 0.2, 0.5, rng),
                  std::invalid_argument);
  // r = 0 forces both arrival counts to 0.
  const auto [e, z] = coupled_step(ScalarState{4}, ScalarState{6}, 0.0, 0.0, rng);
  CHECK(e.count == 3);
  CHECK(z.count == 5);
}

TEST_CASE("full thinning (rho_t = r) feeds both coordinates identically") {
  RandomStream rng(9);
  for (int i = 0; i < 2000; ++i) {
    const auto [e, z] =
        coupled_step(ScalarState{2}, ScalarState{5}, 0.5, 0.5, rng);
    CHECK(z.count - e.count == 3);  // both served, same arrivals
  }
}

TEST_CASE("coupling domination along trajectories") {
  RandomStream base(10);
  for (int traj = 0; traj < 1000; ++traj) {
    RandomStream rng = base.substream(static_cast<std::uint64_t>(traj));
    ScalarState eta{0}, zeta{0};
    for (int t = 0; t < 1000; ++t) {
      std::tie(eta, zeta) = coupled_step(eta, zeta, 0.3, 0.8, rng);
      REQUIRE(eta.count <= zeta.count);
    }
  }
}

TEST_CASE("thinned arrivals are marginally Poisson(rho_t)") {
  RandomStream rng(11);
  std::vector<std::int64_t> hist;
  for (int i = 0; i < 1000000; ++i) {
    const auto [e, z] =
        coupled_step(ScalarState{0}, ScalarState{0}, 0.3, 0.5, rng);
    const auto k = static_cast<std::size_t>(e.count);
    if (k >= hist.size()) hist.resize(k + 1, 0);
    ++hist[k];
  }
  CHECK(poisson_chi_square(hist, 0.3, 1e-3).pass);
}

TEST_CASE("simulate_rbb contract: horizon 0, conservation, determinism") {
  const BinConfiguration init({2, 1, 0});

  int calls = 0;
  RandomStream rng0(12);
  simulate_rbb(init, 0, rng0, [&](std::int64_t t, const BinConfiguration& c) {
    ++calls;
    CHECK(t == 0);
    CHECK(c == init);
  });
  CHECK(calls == 1);

  std::vector<std::vector<std::int64_t>> run1, run2;
  RandomStream a(99), b(99);
  simulate_rbb(init, 300, a, [&](std::int64_t, const BinConfiguration& c) {
    REQUIRE(c.total() == 3);
    run1.push_back(c.occupancies);
  });
  simulate_rbb(init, 300, b, [&](std::int64_t, const BinConfiguration& c) {
    run2.push_back(c.occupancies);
  });
  CHECK(run1 == run2);
}

TEST_CASE("permuting the initial bins leaves summary statistics unchanged") {
  // Exchangeability at Monte Carlo level: mean occupied fraction at a
  // fixed time agrees between a configuration and its permutation.
  const int reps = 20000, T = 10;
  double sum1 = 0.0, sum2 = 0.0;
  RandomStream base(13);
  for (int rep = 0; rep < reps; ++rep) {
    RandomStream r1 = base.substream(static_cast<std::uint64_t>(2 * rep));
    RandomStream r2 = base.substream(static_cast<std::uint64_t>(2 * rep + 1));
    BinConfiguration c1({4, 0, 1, 2});
    BinConfiguration c2({2, 1, 0, 4});
    for (int t = 0; t < T; ++t) {
      rbb_step_inplace(c1, r1);
      rbb_step_inplace(c2, r2);
    }
    sum1 += static_cast<double>(occupied_count(c1));
    sum2 += static_cast<double>(occupied_count(c2));
  }
  const double diff = (sum1 - sum2) / reps;
  CHECK(std::abs(diff) < 3.0 * std::sqrt(2.0 * 1.0 / reps));
}
