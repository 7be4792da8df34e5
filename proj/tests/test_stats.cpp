#include <doctest.h>

#include <cmath>
#include <map>

#include "rbb/exact_chain.hpp"
#include "rbb/stats.hpp"

using namespace rbb;

TEST_CASE("initializers produce exactly N balls") {
  RandomStream rng(1);
  const auto equal = make_initial({InitKind::EqualLoad, {}, 0.0}, 5, 7, rng);
  CHECK(equal.total() == 7);
  CHECK(equal.occupancies == std::vector<std::int64_t>{2, 2, 1, 1, 1});

  for (int rep = 0; rep < 200; ++rep) {
    const auto iid = make_initial({InitKind::IidRepair, {}, 0.5}, 20, 10, rng);
    REQUIRE(iid.total() == 10);
  }

  Initializer bad{InitKind::Explicit, {1, 2}, 0.0};
  CHECK_THROWS_AS(make_initial(bad, 2, 5, rng), std::invalid_argument);
}

TEST_CASE("ensemble statistics respect hard constraints") {
  const RandomStream rng(42);
  const auto series = run_ensemble_rbb(5, 3, {InitKind::EqualLoad, {}, 0.0},
                                       50, 200, rng);
  for (const auto& es : series) {
    CHECK(es.occupied_fraction <= std::min(1.0, 3.0 / 5.0) + 1e-15);
    CHECK(es.occupied_fraction >= 1.0 / 5.0 - 1e-15);  // 3 balls, >= 1 bin
    CHECK(es.mean_load == 3.0 / 5.0);
    std::int64_t m = 0, p = 0;
    for (auto c : es.marginal_counts) m += c;
    for (auto c : es.pair_counts) p += c;
    CHECK(m == 200);
    CHECK(p == 200);
  }
}

TEST_CASE("ensembles are reproducible and thread-count independent") {
  const RandomStream rng(7);
  const Initializer init{InitKind::IidRepair, {}, 0.5};
  const auto a = run_ensemble_rbb(8, 4, init, 20, 64, rng, 1);
  const auto b = run_ensemble_rbb(8, 4, init, 20, 64, rng, 1);
  const auto c = run_ensemble_rbb(8, 4, init, 20, 64, rng, 3);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].occupied_fraction == b[i].occupied_fraction);
    CHECK(a[i].occupied_fraction == c[i].occupied_fraction);
    CHECK(a[i].marginal_counts == c[i].marginal_counts);
    CHECK(a[i].pair_counts == c[i].pair_counts);
  }
}

TEST_CASE("long-run state frequencies at L=3 match the exact stationary law") {
  const ExactChain chain(3, 3);
  const auto pi = stationary_rbb(chain, 1e-12);
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  RandomStream rng(2022);
  const std::int64_t T = 8000000;
  simulate_rbb(BinConfiguration({1, 1, 1}), T, rng,
               [&](std::int64_t t, const BinConfiguration& cfg) {
                 if (t > 0) ++counts[cfg.occupancies];
               });
  double tv = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    tv += std::abs(static_cast<double>(counts[chain.states()[i].occupancies]) /
                       static_cast<double>(T) -
                   pi[i]);
  CHECK(0.5 * tv < 1e-3);
}

TEST_CASE("chaos gap vanishes at t = 0 under product initialization") {
  const RandomStream rng(11);
  // The repair step that pins the total ball count correlates bins at
  // order 1/L, so the t = 0 gap is small but not zero.
  const auto report = chaos_sweep({50}, 0.5, 0, {20000}, rng, 1, 0.1);
  CHECK(report.gap[0] <= 3.0 * report.stderr_[0] + 1.0 / 50.0);
}

TEST_CASE("chaos gap at L=2 is bounded by 1") {
  const RandomStream rng(12);
  const auto report = chaos_sweep({2}, 1.0, 5, {500}, rng, 1, 0.1);
  CHECK(report.gap[0] >= 0.0);
  CHECK(report.gap[0] <= 1.0);
}

TEST_CASE("constant path functional gives 1 on both sides") {
  PathFunctional one;
  one.kind = PathFunctional::Kind::Cylinder;
  one.constraints = {};  // empty cylinder == constant 1
  const RandomStream rng(13);
  const auto res =
      path_functional_test(20, 0.5, {one}, 3, 200, rng, poisson_pmf(0.5, 1e-15));
  CHECK(res.empirical_product == 1.0);
  CHECK(res.product_of_nonlinear == 1.0);
}

TEST_CASE("single-coordinate indicator matches the exact recursion") {
  PathFunctional empty_at_T;
  empty_at_T.kind = PathFunctional::Kind::Cylinder;
  empty_at_T.constraints = {{8, 0}};
  const RandomStream rng(14);
  const auto res = path_functional_test(500, 0.5, {empty_at_T}, 8, 4000, rng,
                                        poisson_pmf(0.5, 1e-15));
  // Exact side is 1 - rho(8); finite-L bias is O(1/L).
  CHECK(std::abs(res.empirical_product - res.product_of_nonlinear) <
        3.0 * res.stderr_ + 5.0 / 500.0);
}

TEST_CASE("two-coordinate factorization gap shrinks with L") {
  PathFunctional occ_at_T;
  occ_at_T.kind = PathFunctional::Kind::Cylinder;
  occ_at_T.constraints = {{5, 0}};
  const RandomStream rng(15);
  double prev_gap = 1.0;
  for (std::int64_t L : {10, 100, 1000}) {
    const auto res = path_functional_test(L, 0.5, {occ_at_T, occ_at_T}, 5,
                                          4000, rng.substream(L),
                                          poisson_pmf(0.5, 1e-15));
    const double gap = std::abs(res.empirical_product - res.product_of_nonlinear);
    CHECK(gap < prev_gap + 3.0 * res.stderr_ + 0.01);
    prev_gap = gap;
  }
}

TEST_CASE("capped monomial expectation against the marginal law") {
  PathFunctional capped;
  capped.kind = PathFunctional::Kind::CappedMonomial;
  capped.time = 4;
  capped.cap = 3;
  const auto laws = nonlinear_pmf_evolve(poisson_pmf(0.5, 1e-15), 4);
  double expect = 0.0;
  for (std::size_t k = 0; k < laws[4].support_size(); ++k)
    expect += laws[4].weights[k] * std::min<double>(static_cast<double>(k), 3.0);
  CHECK(exact_path_functional_expectation(poisson_pmf(0.5, 1e-15), capped, 4) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("chained cylinder probabilities sum to the marginal") {
  // Sum over the middle value of a two-time cylinder recovers the
  // single-time marginal.
  const Pmf initial = poisson_pmf(0.4, 1e-15);
  const auto laws = nonlinear_pmf_evolve(initial, 6);
  double total = 0.0;
  for (std::int64_t a = 0; a < 15; ++a) {
    PathFunctional cyl;
    cyl.constraints = {{2, a}, {6, 1}};
    total += exact_path_functional_expectation(initial, cyl, 6);
  }
  CHECK(total == doctest::Approx(laws[6][1]).epsilon(1e-9));
}

TEST_CASE("convergence curve: r = 0 stays at zero TV") {
  const auto curve = convergence_to_equilibrium(0.0, Pmf::delta(0), 20);
  for (const auto& [t, tv] : curve) CHECK(tv == 0.0);
}

TEST_CASE("convergence curve: starting at equilibrium stays there") {
  const double r = 0.5;
  const double rho = rho_of_r(r);
  Pmf pi = md1_stationary_pmf(rho, 4000, 1e-13);
  // Nudge the mean onto r exactly (truncation leaves ~1e-13 slack).
  const auto curve = convergence_to_equilibrium(pi.mean(), pi, 50);
  for (const auto& [t, tv] : curve) CHECK(tv < 1e-10);
}

TEST_CASE("convergence curve falls below 1e-6 within 500 steps") {
  const auto curve = convergence_to_equilibrium(0.5, Pmf({0.5, 0.5}), 500);
  double min_tv = 1.0;
  bool passed_threshold = false;
  double at_passage = 1.0;
  for (const auto& [t, tv] : curve) {
    min_tv = std::min(min_tv, tv);
    if (!passed_threshold && tv < 1e-4) {
      passed_threshold = true;
      at_passage = tv;
    }
    if (passed_threshold) {
      // Non-increasing after first passage below 1e-4.
      CHECK(tv <= at_passage * 1.0000001 + 1e-15);
      at_passage = std::min(at_passage, tv);
    }
  }
  CHECK(min_tv < 1e-6);
}

TEST_CASE("convergence rejects mismatched means") {
  CHECK_THROWS_AS(convergence_to_equilibrium(0.4, Pmf({0.5, 0.5}), 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_to_equilibrium(1.2, Pmf::delta(1), 10),
                  std::invalid_argument);
}

TEST_CASE("exponential moment bound holds along the evolution") {
  const auto rows = exponential_moment_check(0.5, 5, 200);
  const DriftConstants dc = drift_constants(0.5);
  CHECK(rows[0].moment ==
        doctest::Approx(std::exp(dc.lambda_rho * 5.0)).epsilon(1e-12));
  for (const auto& row : rows) {
    CHECK(row.moment <= row.bound);
    CHECK(row.moment <= row.envelope);
  }
}

TEST_CASE("regime demo: rho = 0 drains and stays at zero") {
  const auto s = regime_demo(0.0, 100, 10, RandomStream(5), 3);
  CHECK(s.mean_final == 0.0);
  CHECK(s.mean_max_excursion == 3.0);
}

TEST_CASE("regime demo verdicts") {
  const auto transient = regime_demo(1.5, 100, 5, RandomStream(6));
  CHECK(transient.verdict.find("transient") != std::string::npos);
  const auto critical = regime_demo(1.0, 100, 5, RandomStream(7));
  CHECK(critical.verdict.find("inconclusive") != std::string::npos);
}

TEST_CASE("batch stderr scales like 1/sqrt(n)") {
  RandomStream rng(8);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rng.next_double();
  const double se = batch_stderr(xs);
  // sd of U(0,1) is sqrt(1/12) ~ 0.2887.
  CHECK(se > 0.5 * 0.2887 / 100.0);
  CHECK(se < 2.0 * 0.2887 / 100.0);
}
