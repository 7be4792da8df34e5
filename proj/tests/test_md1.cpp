#include <doctest.h>

#include <cmath>

#include "rbb/md1.hpp"
#include "rbb/pmf.hpp"

using namespace rbb;

TEST_CASE("rho_of_r values and fixed point") {
  CHECK(rho_of_r(0.0) == 0.0);
  CHECK(rho_of_r(1.0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  for (int i = 1; i <= 20; ++i) {
    const double r = 0.05 * i;
    const double rho = rho_of_r(r);
    CHECK(rho >= 0.0);
    CHECK(rho < 1.0);
    CHECK(std::abs(-rho * rho + 2.0 * rho * (r + 1.0) - 2.0 * r) < 1e-12);
  }
  CHECK_THROWS_AS(rho_of_r(-0.5), std::invalid_argument);
}

TEST_CASE("characteristic function at x = 0 and for rho = 0") {
  CHECK(md1_char_fn(0.5, 0.0) == std::complex<double>(1.0, 0.0));
  CHECK(md1_char_fn(0.5, 2.0 * M_PI) == std::complex<double>(1.0, 0.0));
  for (double x : {0.3, 1.0, 2.5})
    CHECK(std::abs(md1_char_fn(0.0, x) - 1.0) < 1e-12);
  CHECK_THROWS_AS(md1_char_fn(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("characteristic function matches the pmf transform") {
  const double rho = 0.5;
  const Pmf pi = md1_stationary_pmf(rho, 2000, 1e-13);
  CHECK(std::abs(pmf_char_fn(pi, 1.0) - md1_char_fn(rho, 1.0)) < 1e-8);
}

TEST_CASE("transform consistency across rho and a grid of x") {
  for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-12);
    for (int i = 1; i <= 30; ++i) {
      const double x = 0.1 * i;
      CHECK(std::abs(pmf_char_fn(pi, x) - md1_char_fn(rho, x)) < 1e-8);
    }
  }
}

TEST_CASE("drift root for rho = 0.5") {
  const DriftConstants dc = drift_constants(0.5);
  // Root of e^lambda = 1 + 2 lambda.
  CHECK(dc.lambda_star == doctest::Approx(1.25643).epsilon(1e-4));
  CHECK(std::abs(0.5 * std::expm1(dc.lambda_star) - dc.lambda_star) < 1e-10);
  CHECK(dc.lambda_rho == 0.5 * dc.lambda_star);
}

TEST_CASE("drift constants are admissible across (0,1)") {
  for (int i = 1; i <= 99; ++i) {
    const double rho = i / 100.0;
    const DriftConstants dc = drift_constants(rho);
    CHECK(dc.gamma > 0.0);
    CHECK(dc.gamma < 1.0);
    CHECK(dc.C >= 1.0);
    // Strict inequality at lambda_rho.
    CHECK(rho * std::expm1(dc.lambda_rho) < dc.lambda_rho);
  }
  CHECK_THROWS_AS(drift_constants(0.0), std::invalid_argument);
  CHECK_THROWS_AS(drift_constants(1.0), std::invalid_argument);
}

TEST_CASE("one-step drift inequality holds exactly on 0..50") {
  for (double rho : {0.2, 0.5, 0.9}) {
    const DriftConstants dc = drift_constants(rho);
    const double lambda = dc.lambda_rho;
    for (int z = 0; z <= 50; ++z) {
      const double f = std::exp(lambda * z);
      const double served = z > 0 ? 1.0 : 0.0;
      const double pf =
          std::exp(lambda * (z - served) + rho * std::expm1(lambda));
      CHECK(pf - f <= -dc.gamma * f + dc.C + 1e-9 * f);
    }
  }
}

TEST_CASE("chebyshev chaos bound") {
  const double rho = 0.4;
  CHECK(chebyshev_chaos_bound(10, 0.1, rho * rho, rho) ==
        doctest::Approx(1.0 / (4.0 * 10 * 0.01)).epsilon(1e-12));
  // Monotone decreasing in L toward (pair - rho^2) / delta^2.
  const double pair = rho * rho + 0.01;
  double prev = chebyshev_chaos_bound(2, 0.1, pair, rho);
  for (std::int64_t L : {10, 100, 1000, 10000}) {
    const double b = chebyshev_chaos_bound(L, 0.1, pair, rho);
    CHECK(b < prev);
    CHECK(b > 0.01 / 0.01 - 1e-12);
    prev = b;
  }
  CHECK_THROWS_AS(chebyshev_chaos_bound(1, 0.1, 0.2, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(chebyshev_chaos_bound(10, 0.0, 0.2, 0.4), std::invalid_argument);
}
