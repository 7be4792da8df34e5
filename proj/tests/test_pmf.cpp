#include <doctest.h>

#include <cmath>

#include "rbb/md1.hpp"
#include "rbb/pmf.hpp"

using namespace rbb;

TEST_CASE("tv distance basics") {
  const Pmf p({0.5, 0.5});
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(Pmf::delta(0), Pmf::delta(1)) == 1.0);
  CHECK(tv_distance(p, Pmf({1.0})) == 0.5);
}

TEST_CASE("poisson pmf matches the closed form and certifies its tail") {
  const double mean = 0.7;
  const Pmf p = poisson_pmf(mean, 1e-15);
  CHECK(p.tail_bound <= 1e-14);
  double fac = 1.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(p.support_size(), 8); ++k) {
    if (k > 0) fac *= static_cast<double>(k);
    const double expect = std::exp(-mean) * std::pow(mean, double(k)) / fac;
    CHECK(p.weights[k] == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK(poisson_pmf(0.0, 1e-15).weights == std::vector<double>{1.0});
}

TEST_CASE("md1 stationary pmf: rho = 0 is a point mass at 0") {
  const Pmf p = md1_stationary_pmf(0.0, 10);
  CHECK(p[0] == 1.0);
  CHECK(p.mean() == 0.0);
}

TEST_CASE("md1 stationary pmf: pi_0 = 1 - rho") {
  for (double rho : {0.1, 0.4, 0.7, 0.9})
    CHECK(md1_stationary_pmf(rho, 4000)[0] == doctest::Approx(1.0 - rho).epsilon(1e-14));
}

TEST_CASE("md1 stationary mean at rho_r equals r") {
  // rho_r for r = 0.5: 1.5 - sqrt(1.25).
  const double rho = 1.5 - std::sqrt(1.25);
  CHECK(rho == doctest::Approx(0.3819660112501051).epsilon(1e-14));
  const Pmf p = md1_stationary_pmf(rho, 2000);
  CHECK(std::abs(p.mean() - 0.5) < 1e-8);
}

TEST_CASE("md1 stationary pmf rejects rho >= 1 and impossible truncations") {
  CHECK_THROWS_AS(md1_stationary_pmf(1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(md1_stationary_pmf(-0.1, 100), std::invalid_argument);
  CHECK_THROWS_AS(md1_stationary_pmf(0.9, 5), NumericalError);
}

TEST_CASE("delta_0 is the nonlinear fixed point at r = 0") {
  const auto laws = nonlinear_pmf_evolve(Pmf::delta(0), 50);
  for (const auto& law : laws) CHECK(law[0] == 1.0);
}

TEST_CASE("pi_rho is invariant under the nonlinear recursion") {
  for (double rho : {0.2, 0.5, 0.8}) {
    const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-13);
    const auto laws = nonlinear_pmf_evolve(pi, 5);
    for (const auto& law : laws) CHECK(tv_distance(law, pi) < 1e-10);
  }
}

TEST_CASE("nonlinear recursion conserves the mean") {
  const Pmf initial({0.25, 0.5, 0.25});  // mean 1
  const auto laws = nonlinear_pmf_evolve(initial, 200);
  for (const auto& law : laws) CHECK(std::abs(law.mean() - 1.0) < 1e-10);
}

TEST_CASE("queue map shifts the mean by rho - P(positive)") {
  const Pmf law({0.3, 0.4, 0.3});
  const double rho = 0.45;
  const Pmf next = queue_map_step(law, rho);
  CHECK(next.mean() ==
        doctest::Approx(law.mean() - (1.0 - law[0]) + rho).epsilon(1e-12));
  CHECK(next.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("md1 law evolution from equilibrium stays put") {
  const double rho = 0.6;
  const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-13);
  const auto laws = md1_pmf_evolve(pi, rho, 10);
  CHECK(tv_distance(laws.back(), pi) < 1e-10);
}

TEST_CASE("pmf validation") {
  CHECK_THROWS_AS(Pmf({0.5, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(queue_map_step(Pmf::delta(0), -1.0), std::invalid_argument);
}
