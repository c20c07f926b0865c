#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "spellkit/gof.hpp"
#include "spellkit/rng.hpp"

using namespace spellkit;

namespace {

FrequencyTable table_of(std::initializer_list<std::pair<int, double>> entries) {
  int max_v = 0;
  for (const auto& [k, c] : entries) max_v = std::max(max_v, k);
  FrequencyTable t;
  t.counts.assign(static_cast<std::size_t>(max_v), 0.0);
  for (const auto& [k, c] : entries) t.counts[static_cast<std::size_t>(k) - 1] = c;
  return t;
}

}  // namespace

TEST_CASE("chi2 statistic hand example") {
  // observed {1: 60, 2: 40} vs geometric 0.5 over classes {1},{2},{>=3}:
  // expected {50, 25, 25} -> 2 + 9 + 25 = 36
  const FrequencyTable obs = table_of({{1, 60.0}, {2, 40.0}});
  const PmfTable model = LerchDist(LerchParams::geometric(0.5)).table(1e-10);
  Classes classes;
  classes.upper = {1, 2};
  CHECK(chi2_statistic(obs, model, classes) == doctest::Approx(36.0).epsilon(1e-9));
}

TEST_CASE("chi2 statistic is zero when observed equals expected") {
  const PmfTable model = LerchDist(LerchParams::geometric(0.5)).table(1e-10);
  const Classes classes = Classes::per_integer(10);
  FrequencyTable obs;
  obs.counts.assign(10, 0.0);
  const double n = 1000.0;
  for (int k = 1; k <= 10; ++k)
    obs.counts[static_cast<std::size_t>(k) - 1] = n * model.at(k);
  // put the exact tail into... the tail class has zero observed; add it to
  // make observed proportional to expected everywhere
  // (instead extend observed with a value beyond 10 is impossible in the
  // table; use classes where the tail expectation is matched by zero mass)
  // Here we simply check the statistic equals the pure tail term.
  const double tail_expected = n * (model.total() - model.cdf(10));
  CHECK(chi2_statistic(obs, model, classes) ==
        doctest::Approx(tail_expected).epsilon(1e-9));
}

TEST_CASE("classes") {
  const Classes c = Classes::per_integer(5);
  CHECK(c.count() == 6);
  CHECK(c.index_of(1) == 0);
  CHECK(c.index_of(5) == 4);
  CHECK(c.index_of(6) == 5);
  CHECK(c.index_of(100) == 5);
  Classes merged;
  merged.upper = {1, 3};
  CHECK(merged.index_of(2) == 1);
  CHECK(merged.index_of(3) == 1);
  CHECK(merged.index_of(4) == 2);
}

TEST_CASE("merging classes with zero observed and zero expected is a no-op") {
  // model with no mass on {3, 4}
  const PmfTable model({0.5, 0.3, 0.0, 0.0}, 0.2);
  const FrequencyTable obs = table_of({{1, 6.0}, {2, 4.0}});
  Classes split;
  split.upper = {1, 2, 3, 4};
  Classes merged;
  merged.upper = {1, 2, 4};
  CHECK(chi2_statistic(obs, model, split) ==
        doctest::Approx(chi2_statistic(obs, model, merged)).epsilon(1e-14));
}

TEST_CASE("zero expectation with positive observation is an infinite statistic") {
  const PmfTable model({0.5, 0.5}, 0.0);
  const FrequencyTable obs = table_of({{1, 5.0}, {2, 4.0}, {3, 1.0}});
  const Classes classes = Classes::per_integer(3);
  CHECK(std::isinf(chi2_statistic(obs, model, classes)));
}

TEST_CASE("model-based class grid ends where the expected tail count drops below one") {
  const PmfTable t = LerchDist(LerchParams::geometric(0.5)).table(1e-10);
  // n = 1024: survival(k) = 0.5^k, so n * survival(k) < 1 first at k = 11
  const Classes c = Classes::for_model(t, 1024);
  CHECK(c.upper.back() == 11);
  // grid depends on n, not on any sample
  CHECK(Classes::for_model(t, 64).upper.back() == 7);
  // never extends past the table
  CHECK(Classes::for_model(t, 1'000'000'000).upper.back() <= t.max_k());
}

TEST_CASE("outlier smoothing follows the spread rule") {
  SUBCASE("single isolated outlier") {
    // 1..10 nonzero, 11..19 zero, 20 has one count -> 11..20 get 0.1 each
    FrequencyTable t;
    t.counts.assign(20, 0.0);
    for (int k = 1; k <= 10; ++k) t.counts[static_cast<std::size_t>(k) - 1] = 5.0;
    t.counts[19] = 1.0;
    const FrequencyTable s = smooth_outliers(t, 5);
    for (int k = 11; k <= 20; ++k)
      CHECK(s.counts[static_cast<std::size_t>(k) - 1] == doctest::Approx(0.1));
    CHECK(s.total() == doctest::Approx(t.total()).epsilon(1e-12));
  }
  SUBCASE("no gaps means identity") {
    const FrequencyTable t = table_of({{1, 3.0}, {2, 2.0}, {3, 1.0}});
    const FrequencyTable s = smooth_outliers(t, 5);
    CHECK(s.counts == t.counts);
  }
  SUBCASE("two outliers, each against its own anchor") {
    const FrequencyTable t = table_of({{1, 5.0}, {5, 1.0}, {9, 1.0}});
    const FrequencyTable s = smooth_outliers(t, 3);
    CHECK(s.counts[0] == doctest::Approx(5.0));
    for (int k = 2; k <= 5; ++k)
      CHECK(s.counts[static_cast<std::size_t>(k) - 1] == doctest::Approx(0.25));
    for (int k = 6; k <= 9; ++k)
      CHECK(s.counts[static_cast<std::size_t>(k) - 1] == doctest::Approx(0.25));
    CHECK(s.total() == doctest::Approx(t.total()).epsilon(1e-12));
  }
  SUBCASE("mass conservation on random tables") {
    RngStream rng(5150, 0);
    for (int rep = 0; rep < 1000; ++rep) {
      FrequencyTable t;
      const int m = 5 + static_cast<int>(rng.uniform() * 60);
      t.counts.assign(static_cast<std::size_t>(m), 0.0);
      for (int k = 0; k < m; ++k)
        if (rng.uniform() < 0.3)
          t.counts[static_cast<std::size_t>(k)] =
              std::floor(rng.uniform() * 20.0);
      t.counts[0] += 1.0;  // keep non-empty
      const FrequencyTable s = smooth_outliers(t, 3);
      CHECK(s.total() == doctest::Approx(t.total()).epsilon(1e-9));
    }
  }
}

TEST_CASE("mc gof basics") {
  const LerchDist model(LerchParams::geometric(0.5));
  const PmfTable table = model.table(1e-10);
  RngStream rng(77, 0);
  const std::vector<int> sample = model.sample(rng, 500);

  GofOptions opt;
  opt.replicates = 400;
  const GofResult r = mc_gof(sample, table, RngStream(1234, 9), opt);
  CHECK(r.replicate_stats.size() == 400);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
  // p is exactly the exceedance fraction
  long exceed = 0;
  for (double s : r.replicate_stats)
    if (s > r.chi2_ref) ++exceed;
  CHECK(r.p_value == doctest::Approx(static_cast<double>(exceed) / 400.0));

  // determinism: same seed, same result
  const GofResult r2 = mc_gof(sample, table, RngStream(1234, 9), opt);
  CHECK(r.chi2_ref == r2.chi2_ref);
  CHECK(r.replicate_stats == r2.replicate_stats);
  CHECK(r.p_value == r2.p_value);

  // and the seed actually reaches the replicates
  const GofResult r3 = mc_gof(sample, table, RngStream(1235, 9), opt);
  CHECK(r.replicate_stats != r3.replicate_stats);

  GofOptions too_few;
  too_few.replicates = 50;
  CHECK_THROWS_AS(mc_gof(sample, table, rng, too_few), std::invalid_argument);
  CHECK_THROWS_AS(mc_gof({}, table, rng, opt), std::invalid_argument);
}

TEST_CASE("mc gof p-value is 1 when the reference statistic is minimal") {
  // a sample exactly proportional to the model over the head classes has a
  // tiny chi2_ref; almost all replicates exceed it
  const LerchDist model(LerchParams::geometric(0.5));
  const PmfTable table = model.table(1e-10);
  std::vector<int> sample;
  for (int k = 1; k <= 10; ++k) {
    const int copies = static_cast<int>(std::lround(4096.0 * model.pmf(k)));
    for (int i = 0; i < copies; ++i) sample.push_back(k);
  }
  GofOptions opt;
  opt.replicates = 200;
  const GofResult r = mc_gof(sample, table, RngStream(5, 5), opt);
  CHECK(r.p_value > 0.95);
}

TEST_CASE("mc gof rejects a wrong model") {
  const LerchDist truth(LerchParams::geometric(0.5));
  const LerchDist wrong(LerchParams::geometric(0.9));
  RngStream rng(404, 0);
  const std::vector<int> sample = truth.sample(rng, 1000);
  GofOptions opt;
  opt.replicates = 500;
  const GofResult r = mc_gof(sample, wrong.table(1e-10), RngStream(404, 1), opt);
  CHECK(r.p_value < 0.01);
}

TEST_CASE("mc gof calibration under the null (small version)") {
  const LerchDist model(LerchParams::lerch3(0.9, 0.5, -0.5));
  const PmfTable table = model.table(1e-10);
  int rejections = 0;
  const int runs = 40;
  for (int i = 0; i < runs; ++i) {
    RngStream draw(9000 + i, 0);
    const std::vector<int> sample = model.sample(draw, 500);
    GofOptions opt;
    opt.replicates = 300;
    const GofResult r = mc_gof(sample, table, RngStream(9000 + i, 1), opt);
    if (r.p_value <= 0.05) ++rejections;
  }
  // loose band for the small version; the acceptance suite runs the full one
  CHECK(rejections <= 8);
}

TEST_CASE("parametric bootstrap option runs") {
  const LerchDist model(LerchParams::geometric(0.5));
  RngStream rng(88, 0);
  const std::vector<int> sample = model.sample(rng, 300);
  GofOptions opt;
  opt.replicates = 120;
  opt.refit_family = Family::geometric;
  const GofResult r = mc_gof(sample, model.table(1e-10), RngStream(88, 1), opt);
  CHECK(r.replicate_stats.size() == 120);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("smoothed flag is recorded and mass preserved inside mc_gof") {
  const LerchDist model(LerchParams::geometric(0.6));
  std::vector<int> sample;
  RngStream rng(3, 3);
  for (int v : model.sample(rng, 400)) sample.push_back(v);
  sample.push_back(40);  // an isolated far outlier
  GofOptions opt;
  opt.replicates = 150;
  opt.smooth = true;
  const GofResult r = mc_gof(sample, model.table(1e-10), RngStream(3, 4), opt);
  CHECK(r.smoothed);
  GofOptions raw;
  raw.replicates = 150;
  const GofResult r0 = mc_gof(sample, model.table(1e-10), RngStream(3, 4), raw);
  CHECK(!r0.smoothed);
  // smoothing spreads the outlier, so the reference statistic changes
  CHECK(r.chi2_ref != doctest::Approx(r0.chi2_ref));
}
