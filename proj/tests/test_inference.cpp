#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "spellkit/errors.hpp"
#include "spellkit/inference.hpp"
#include "spellkit/rng.hpp"

using namespace spellkit;

namespace {

SpellSample sample_of(std::vector<int> values, Variable v = Variable::it) {
  SpellSample s;
  s.variable = v;
  s.values = std::move(values);
  return s;
}

SpellSample draw_from(const LerchParams& p, std::size_t n, std::uint64_t seed,
                      Variable v = Variable::it) {
  const LerchDist d(p);
  RngStream rng(seed, 11);
  return sample_of(d.sample(rng, n), v);
}

}  // namespace

TEST_CASE("log-likelihood closed forms") {
  // single observation v = 1 under the geometric law: ln pmf(1) = ln(1-theta)
  for (double theta : {0.1, 0.45, 0.9})
    CHECK(log_likelihood(LerchParams::geometric(theta), sample_of({1})) ==
          doctest::Approx(std::log(1.0 - theta)).epsilon(1e-12));

  // [1,1,2] under geometric 0.5: (1-t)^2 * (1-t) t = 0.0625
  CHECK(log_likelihood(LerchParams::geometric(0.5), sample_of({1, 1, 2})) ==
        doctest::Approx(std::log(0.0625)).epsilon(1e-12));

  // definitional cross-check against sum of ln pmf
  const LerchParams p = LerchParams::lerch3(0.913, 0.442, -0.953);
  const SpellSample s = sample_of({1, 1, 2, 3, 5, 8, 13, 2, 1, 4});
  const LerchDist d(p);
  double direct = 0.0;
  for (int v : s.values) direct += d.log_pmf(v);
  CHECK(log_likelihood(p, s) == doctest::Approx(direct).epsilon(1e-10));

  CHECK_THROWS_AS(log_likelihood(LerchParams{1.5, 0, 0}, sample_of({1})),
                  std::invalid_argument);
}

TEST_CASE("geometric fit uses the closed form") {
  const SpellSample s = draw_from(LerchParams::geometric(0.446), 100000, 31);
  const FittedModel fm = fit_mle(s, Family::geometric);
  const double mean = s.mean();
  CHECK(fm.params.theta == doctest::Approx((mean - 1.0) / mean).epsilon(1e-8));
  CHECK(fm.params.theta == doctest::Approx(0.446).epsilon(0.012));
  CHECK(fm.converged);
  CHECK(fm.params.s == 0.0);
  CHECK(fm.params.a == 1.0);
  // loglik recomputes
  CHECK(fm.loglik ==
        doctest::Approx(log_likelihood(fm.params, s)).epsilon(1e-10));
}

TEST_CASE("fit refuses tiny samples and flags degenerate ones") {
  CHECK_THROWS_AS(fit_mle(sample_of({1, 2, 3}), Family::geometric),
                  std::invalid_argument);

  const SpellSample ones = sample_of(std::vector<int>(50, 1));
  const FittedModel fm = fit_mle(ones, Family::geometric);
  CHECK(fm.boundary);
  CHECK(!fm.converged);
  CHECK(fm.params.theta == 0.0);
  CHECK(fm.loglik == 0.0);

  const FittedModel fm3 = fit_mle(ones, Family::lerch3);
  CHECK(fm3.boundary);
}

TEST_CASE("small samples carry a warning") {
  const SpellSample s = sample_of({1, 2, 1, 3, 1, 2, 4, 1, 2, 1, 1, 5});
  const FittedModel fm = fit_mle(s, Family::geometric);
  REQUIRE(!fm.warnings.empty());
  CHECK(fm.warnings.front().find("small sample") != std::string::npos);
}

TEST_CASE("one-parameter families recover their truth") {
  {
    const SpellSample s = draw_from(LerchParams::logarithmic(0.6), 50000, 5);
    const FittedModel fm = fit_mle(s, Family::logarithmic);
    CHECK(fm.converged);
    CHECK(fm.params.theta == doctest::Approx(0.6).epsilon(0.02));
    CHECK(fm.params.s == 1.0);
    CHECK(fm.params.a == 0.0);
  }
  {
    const SpellSample s = draw_from(LerchParams::polylog(0.85, 0.7), 50000, 6);
    const FittedModel fm = fit_mle(s, Family::polylog);
    CHECK(fm.converged);
    CHECK(fm.params.theta == doctest::Approx(0.85).epsilon(0.03));
    CHECK(fm.params.s == doctest::Approx(0.7).epsilon(0.15));
  }
}

TEST_CASE("moment conditions hold at converged interior optima") {
  // AM for every family; GM when s is free; HM when a is free.
  const SpellSample s = draw_from(LerchParams::lerch3(0.9, 0.6, -0.5), 40000, 17);

  const FittedModel geo = fit_mle(s, Family::geometric);
  const LerchDist dg(geo.params);
  CHECK(dg.mean() == doctest::Approx(geo.sample_moments.mean).epsilon(1e-4));

  const FittedModel pl = fit_mle(s, Family::polylog);
  REQUIRE(pl.converged);
  const LerchDist dp(pl.params);
  CHECK(dp.mean() == doctest::Approx(pl.sample_moments.mean).epsilon(1e-4));
  CHECK(dp.mean_log_shifted() ==
        doctest::Approx(pl.sample_moments.mean_log_shifted).epsilon(1e-4));

  const FittedModel l3 = fit_mle(s, Family::lerch3);
  REQUIRE(l3.converged);
  const LerchDist d3(l3.params);
  CHECK(d3.mean() == doctest::Approx(l3.sample_moments.mean).epsilon(1e-4));
  CHECK(d3.mean_log_shifted() ==
        doctest::Approx(l3.sample_moments.mean_log_shifted).epsilon(1e-4));
  CHECK(d3.mean_inv_shifted() ==
        doctest::Approx(l3.sample_moments.mean_inv_shifted).epsilon(1e-4));

  const FittedModel el = fit_mle(s, Family::extended_log);
  REQUIRE(el.converged);
  const LerchDist de(el.params);
  CHECK(de.mean() == doctest::Approx(el.sample_moments.mean).epsilon(1e-4));
  CHECK(de.mean_inv_shifted() ==
        doctest::Approx(el.sample_moments.mean_inv_shifted).epsilon(1e-4));
}

TEST_CASE("full model dominates sub-families in likelihood") {
  const SpellSample s = draw_from(LerchParams::lerch3(0.9, 0.6, -0.5), 20000, 23);
  const FittedModel full = fit_mle(s, Family::lerch3);
  for (Family f : {Family::polylog, Family::logarithmic, Family::geometric,
                   Family::extended_log}) {
    const FittedModel sub = fit_mle(s, f);
    CHECK(full.loglik >= sub.loglik - 1e-6);
  }
}

TEST_CASE("likelihood-ratio test") {
  const SpellSample s = draw_from(LerchParams::polylog(0.85, 0.7), 20000, 41);
  const FittedModel full = fit_mle(s, Family::lerch3);
  const FittedModel pl = fit_mle(s, Family::polylog);
  const FittedModel geo = fit_mle(s, Family::geometric);

  SUBCASE("same model gives D = 0, p = 1") {
    const LlrResult r = llr_test(pl, pl);
    CHECK(r.d == doctest::Approx(0.0));
    CHECK(r.df == 0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("degrees of freedom are parameter-count differences") {
    CHECK(llr_test(pl, full).df == 1);
    CHECK(llr_test(geo, full).df == 2);
    CHECK(llr_test(geo, pl).df == 1);
  }
  SUBCASE("p matches the chi-squared tail") {
    // pin d = 3.841 -> p = 0.050 via two synthetic fits
    FittedModel a = pl, b = full;
    a.loglik = -1000.0;
    b.loglik = a.loglik + 3.841 / 2.0;
    const LlrResult r = llr_test(a, b);
    CHECK(r.d == doctest::Approx(3.841).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.050).epsilon(2e-3));
  }
  SUBCASE("non-nested pairs are rejected") {
    const FittedModel el = fit_mle(s, Family::extended_log);
    CHECK_THROWS_AS(llr_test(el, pl), std::invalid_argument);
  }
  SUBCASE("inverted likelihoods raise the inconsistency error") {
    FittedModel a = pl, b = full;
    a.loglik = -1000.0;
    b.loglik = -1001.0;
    CHECK_THROWS_AS(llr_test(a, b), InconsistentFitsError);
  }
}

TEST_CASE("model selection picks the parsimonious truth") {
  // data from an exact geometric law: geometric should win almost always
  int geometric_wins = 0;
  for (int run = 0; run < 20; ++run) {
    const SpellSample s =
        draw_from(LerchParams::geometric(0.45), 2500, 1000 + run);
    const SelectionResult sel = select_model(s, 0.05);
    if (sel.model.family == Family::geometric) ++geometric_wins;
    CHECK(sel.trace.entries.size() == 5);
  }
  CHECK(geometric_wins >= 18);

  // data needing all three parameters
  const SpellSample s3 = draw_from(LerchParams::lerch3(0.87, 1.3, -0.5), 10000, 7);
  const SelectionResult sel3 = select_model(s3, 0.05);
  CHECK(sel3.model.family == Family::lerch3);

  // trace is complete and consistent
  for (const auto& e : sel3.trace.entries) {
    REQUIRE(e.fit.has_value());
    if (e.family != Family::lerch3) {
      REQUIRE(e.vs_full.has_value());
      CHECK(e.vs_full->d >= -1e-8);
    }
  }
}

TEST_CASE("negative s is reachable only when the constraint is lifted") {
  // data from an increasing-then-decaying law (s < 0)
  const SpellSample s = draw_from(LerchParams::polylog(0.5, -0.6), 40000, 71);

  FitOptions relaxed;
  relaxed.s_nonneg = false;
  const FittedModel free_fit = fit_mle(s, Family::polylog, relaxed);
  CHECK(free_fit.converged);
  CHECK(free_fit.params.s == doctest::Approx(-0.6).epsilon(0.15));
  CHECK(free_fit.params.theta == doctest::Approx(0.5).epsilon(0.1));

  const FittedModel boxed = fit_mle(s, Family::polylog);  // s >= 0 default
  CHECK(boxed.params.s >= 0.0);
  CHECK(free_fit.loglik >= boxed.loglik - 1e-6);
}

TEST_CASE("lerch3 round-trip within standard errors (spot check)") {
  const LerchParams truth = LerchParams::lerch3(0.913, 0.442, -0.953);
  int ok = 0;
  for (int run = 0; run < 5; ++run) {
    const SpellSample s = draw_from(truth, 50000, 500 + run);
    const FittedModel fm = fit_mle(s, Family::lerch3);
    if (!fm.converged) continue;
    REQUIRE(fm.std_errors[0].has_value());
    REQUIRE(fm.std_errors[1].has_value());
    REQUIRE(fm.std_errors[2].has_value());
    const bool in3 =
        std::fabs(fm.params.theta - truth.theta) <= 3.0 * *fm.std_errors[0] &&
        std::fabs(fm.params.s - truth.s) <= 3.0 * *fm.std_errors[1] &&
        std::fabs(fm.params.a - truth.a) <= 3.0 * *fm.std_errors[2];
    if (in3) ++ok;
  }
  CHECK(ok >= 4);
}
