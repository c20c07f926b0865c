#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "spellkit/errors.hpp"
#include "spellkit/lerch.hpp"
#include "spellkit/rng.hpp"

using namespace spellkit;

TEST_CASE("phi closed forms") {
  // geometric series at s = 0
  CHECK(phi(0.5, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-13));
  // theta = 0 leaves only the n = 0 term
  CHECK(phi(0.0, 2.0, 4.0) == doctest::Approx(0.0625).epsilon(1e-13));
  CHECK(phi(0.0, -1.5, 2.0) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-13));
  // -ln(1-theta)/theta at s = 1, x = 1
  CHECK(phi(0.5, 1.0, 1.0) ==
        doctest::Approx(-std::log(0.5) / 0.5).epsilon(1e-12));
  CHECK(phi(0.5, 1.0, 1.0) == doctest::Approx(1.3862944).epsilon(1e-7));
}

TEST_CASE("phi agrees with extended-precision direct summation") {
  for (double theta : {0.1, 0.5, 0.9, 0.97})
    for (double s : {-0.5, 0.0, 0.5, 1.0, 2.0})
      for (double x : {0.047, 0.5, 1.0, 5.0}) {
        const long double ref = oracle::phi_direct(theta, s, x);
        CHECK(phi(theta, s, x) ==
              doctest::Approx(static_cast<double>(ref)).epsilon(1e-11));
      }
}

TEST_CASE("phi domain and convergence errors") {
  CHECK_THROWS_AS(phi(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(-0.1, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(0.5, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(0.5, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("family metadata") {
  CHECK(free_param_count(Family::lerch3) == 3);
  CHECK(free_param_count(Family::polylog) == 2);
  CHECK(free_param_count(Family::logarithmic) == 1);
  CHECK(free_param_count(Family::geometric) == 1);
  CHECK(free_param_count(Family::extended_log) == 2);

  CHECK(nested_in(Family::logarithmic, Family::polylog));
  CHECK(nested_in(Family::geometric, Family::polylog));
  CHECK(nested_in(Family::polylog, Family::lerch3));
  CHECK(nested_in(Family::extended_log, Family::lerch3));
  CHECK(nested_in(Family::geometric, Family::geometric));
  CHECK(!nested_in(Family::extended_log, Family::polylog));
  CHECK(!nested_in(Family::lerch3, Family::polylog));
  CHECK(!nested_in(Family::geometric, Family::logarithmic));

  CHECK(family_from_name("polylog") == Family::polylog);
  CHECK_THROWS_AS(family_from_name("weird"), std::invalid_argument);

  CHECK(conforms_to(LerchParams::geometric(0.3), Family::geometric));
  CHECK(!conforms_to(LerchParams::lerch3(0.3, 0.5, 0.2), Family::polylog));
}

TEST_CASE("pmf closed forms") {
  // geometric theta = 0.446: pmf(k) = (1 - theta) theta^(k-1)
  const LerchDist geom(LerchParams::geometric(0.446));
  CHECK(geom.pmf(1) == doctest::Approx(0.554).epsilon(1e-12));
  CHECK(geom.pmf(2) == doctest::Approx(0.247084).epsilon(1e-9));

  // logarithmic theta = 0.5: pmf(1) = -theta / ln(1 - theta)
  const LerchDist logd(LerchParams::logarithmic(0.5));
  CHECK(logd.pmf(1) == doctest::Approx(0.7213475).epsilon(1e-7));
  for (double theta : {0.1, 0.5, 0.9}) {
    const LerchDist d(LerchParams::logarithmic(theta));
    for (int k = 1; k <= 100; ++k)
      CHECK(d.pmf(k) ==
            doctest::Approx(-std::pow(theta, k) / (k * std::log(1.0 - theta)))
                .epsilon(1e-12));
  }

  CHECK_THROWS_AS(LerchDist(LerchParams{1.2, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(LerchDist(LerchParams{0.5, 0.0, -1.5}), std::invalid_argument);
  CHECK_THROWS_AS(geom.pmf(0), std::invalid_argument);
}

TEST_CASE("pmf normalizes and collapses to geometric at s = 0") {
  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  double cum = 0.0;
  for (int k = 1; k <= 2000; ++k) cum += d.pmf(k);
  CHECK(cum + d.survival(2000) == doctest::Approx(1.0).epsilon(1e-10));

  // s = 0 makes a irrelevant: matches the geometric law exactly
  const LerchDist flat(LerchParams::lerch3(0.37, 0.0, 2.4));
  const LerchDist geom(LerchParams::geometric(0.37));
  for (int k = 1; k <= 200; ++k)
    CHECK(flat.pmf(k) == doctest::Approx(geom.pmf(k)).epsilon(1e-14));
}

TEST_CASE("normalization holds over random parameter draws") {
  RngStream rng(424242, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const double theta = 0.01 + 0.96 * rng.uniform();
    const double s = -1.0 + 4.0 * rng.uniform();  // include increasing pmfs
    const double a = -0.95 + 3.0 * rng.uniform();
    const LerchDist d(LerchParams::lerch3(theta, s, a));
    const PmfTable t = d.table(1e-10);
    CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(t.tail_mass() < 1e-10);
    for (int r : {0, 1, 5, std::max(1, t.max_k() / 2)})
      CHECK(d.cdf(r) + d.survival(r) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pmf is non-increasing for s >= 0") {
  for (const auto& p :
       {LerchParams::lerch3(0.913, 0.442, -0.953), LerchParams::polylog(0.9, 1.1),
        LerchParams::logarithmic(0.7), LerchParams::geometric(0.446)}) {
    const LerchDist d(p);
    for (int k = 1; k <= 200; ++k) CHECK(d.pmf(k + 1) <= d.pmf(k) + 1e-15);
  }
}

TEST_CASE("survival identities") {
  const LerchDist geom(LerchParams::geometric(0.5));
  CHECK(geom.survival(0) == 1.0);
  CHECK(geom.survival(3) == doctest::Approx(0.125).epsilon(1e-12));

  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  CHECK(d.survival(0) == 1.0);
  double cum = 0.0;
  for (int r = 1; r <= 50; ++r) {
    cum += d.pmf(r);
    CHECK(d.survival(r) == doctest::Approx(1.0 - cum).epsilon(1e-10));
    CHECK(d.survival(r) <= d.survival(r - 1) + 1e-15);
  }
}

TEST_CASE("hazard identities") {
  // memoryless: constant 1 - theta for the geometric law
  const LerchDist geom(LerchParams::geometric(0.446));
  for (int r = 1; r <= 100; ++r)
    CHECK(geom.hazard(r) == doctest::Approx(0.554).epsilon(1e-12));

  const LerchDist logd(LerchParams::logarithmic(0.5));
  CHECK(logd.hazard(1) == doctest::Approx(logd.pmf(1)).epsilon(1e-12));

  // definitional identity and the survival recursion
  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  for (int r = 1; r <= 100; ++r) {
    CHECK(d.hazard(r) ==
          doctest::Approx(d.pmf(r) / d.survival(r - 1)).epsilon(1e-12));
    CHECK(d.survival(r) == doctest::Approx(d.survival(r - 1) * (1.0 - d.hazard(r)))
                               .epsilon(1e-12));
  }
}

TEST_CASE("quantiles") {
  const LerchDist geom(LerchParams::geometric(0.5));
  CHECK(geom.quantile(1e-12) == 1);
  CHECK(geom.quantile(0.99) == 7);
  CHECK_THROWS_AS(geom.quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(geom.quantile(1.0), std::invalid_argument);

  const LerchDist g446(LerchParams::geometric(0.446));
  CHECK(g446.quantile(0.5) == oracle::quantile_scan(g446, 0.5));
  CHECK(g446.quantile(0.5) == 1);  // cdf(1) = 0.554 >= 0.5

  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  for (double q : {0.1, 0.5, 0.9, 0.99})
    CHECK(d.quantile(q) == oracle::quantile_scan(d, q));
}

TEST_CASE("moments") {
  const LerchDist g446(LerchParams::geometric(0.446));
  CHECK(g446.mean() == doctest::Approx(1.8050542).epsilon(1e-7));

  const LerchDist g0(LerchParams::geometric(0.0));
  CHECK(g0.mean() == doctest::Approx(1.0).epsilon(1e-13));

  const LerchDist logd(LerchParams::logarithmic(0.5));
  CHECK(logd.mean() == doctest::Approx(1.4426950).epsilon(1e-7));

  // cross-check the three moment kinds against direct summation
  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  double m = 0.0, mlog = 0.0, minv = 0.0;
  for (int k = 1; k <= 5000; ++k) {
    const double p = d.pmf(k);
    m += k * p;
    mlog += std::log(k + d.params().a) * p;
    minv += p / (k + d.params().a);
  }
  CHECK(d.mean() == doctest::Approx(m).epsilon(1e-10));
  CHECK(d.mean_log_shifted() == doctest::Approx(mlog).epsilon(1e-9));
  CHECK(d.mean_inv_shifted() == doctest::Approx(minv).epsilon(1e-10));
}

TEST_CASE("pmf table construction") {
  const LerchDist geom(LerchParams::geometric(0.5));
  const PmfTable t = geom.table(1e-10);
  CHECK(t.max_k() == 34);  // 0.5^34 < 1e-10 <= 0.5^33

  double sum = 0.0;
  for (int k = 1; k <= t.max_k(); ++k) sum += t.at(k);
  CHECK(sum + t.tail_mass() == doctest::Approx(1.0).epsilon(1e-12));

  const LerchDist g446(LerchParams::geometric(0.446));
  const PmfTable t2 = g446.table(1e-10);
  CHECK(std::pow(0.446, t2.max_k()) < 1e-10);
  CHECK(std::pow(0.446, t2.max_k() - 1) >= 1e-10);

  CHECK_THROWS_AS(geom.table(1e-3), std::invalid_argument);
  CHECK_THROWS_AS(geom.table(0.0), std::invalid_argument);

  // degenerate law: single entry
  const PmfTable td = LerchDist(LerchParams::geometric(0.0)).table(1e-10);
  CHECK(td.max_k() == 1);
  CHECK(td.at(1) == 1.0);
}

TEST_CASE("sampling is deterministic and matches the law") {
  const LerchDist d(LerchParams::lerch3(0.913, 0.442, -0.953));
  RngStream a(99, 7), b(99, 7);
  const auto xs = d.sample(a, 2000);
  const auto ys = d.sample(b, 2000);
  CHECK(xs == ys);
  for (int v : xs) CHECK(v >= 1);

  RngStream big(123, 1);
  const auto draws = d.sample(big, 1'000'000);
  const auto emp = oracle::empirical_pmf(draws);
  double max_dev = 0.0;
  for (const auto& [k, p] : emp) max_dev = std::max(max_dev, std::fabs(p - d.pmf(k)));
  CHECK(max_dev < 5e-3);

  // CLT bound on the sample mean of a geometric draw
  RngStream g(7, 1);
  const auto gd = LerchDist(LerchParams::geometric(0.5)).sample(g, 100000);
  CHECK(oracle::mean_of(gd) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("pmf table sampling and quantiles") {
  const LerchDist d(LerchParams::geometric(0.5));
  const PmfTable t = d.table(1e-10);
  CHECK(t.quantile(0.99) == 7);
  RngStream rng(2, 3);
  const auto draws = t.sample(rng, 50000);
  for (int v : draws) {
    CHECK(v >= 1);
    CHECK(v <= t.max_k() + 1);
  }
  CHECK(oracle::mean_of(draws) == doctest::Approx(2.0).epsilon(0.015));
}
