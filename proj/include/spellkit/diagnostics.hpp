#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spellkit/lerch.hpp"
#include "spellkit/types.hpp"

namespace spellkit {

struct TrendResult {
  double tau = 0.0;            // Kendall rank correlation, tie-corrected
  long long s = 0;             // sum of pairwise signs
  double var_s = 0.0;          // tie-corrected variance of S
  double var_corrected = 0.0;  // after autocorrelation correction
  double correction_factor = 1.0;
  int significant_lags = 0;
  double z = 0.0;              // with continuity correction
  double z_corrected = 0.0;
  double p_classical = 1.0;    // two-sided, normal approximation
  double p_corrected = 1.0;
  bool degenerate = false;     // all values equal
};

/// S = sum_{i<j} sign(x_j - x_i); the pair loop runs in parallel with an
/// integer reduction, so the result is exact and thread-count
/// independent. The _serial variant is the reference implementation.
long long mk_s_statistic(std::span<const double> series);
long long mk_s_statistic_serial(std::span<const double> series);

/// Mann-Kendall trend test; requires length >= 10.
TrendResult mk_test(std::span<const double> series);

/// Mann-Kendall with the variance-inflation correction for serial
/// autocorrelation: the variance is scaled by
/// 1 + 2/(n(n-1)(n-2)) * sum_i (n-i)(n-i-1)(n-i-2) rho_s(i)
/// over lags i <= max_lag whose rank autocorrelation is significant at
/// the 0.05 level. Requires length >= 20.
TrendResult mk_test_corrected(std::span<const double> series, int max_lag = 20);

struct RatioPoint {
  int r = 0;
  double ratio = 0.0;  // S_{r+1} / S_r
};

struct RatioSeries {
  std::vector<RatioPoint> points;
  int min_count = 0;  // reporting cutoff applied
};

/// Ratios S_{r+1}/S_r with S_r = #{values >= r}, reported for r where the
/// number of observations equal to r is at least min_count.
RatioSeries survival_ratios(const SpellSample& sample, int min_count = 10);

/// Theoretical counterpart on a pmf table: S_r = P(X >= r).
RatioSeries survival_ratios(const PmfTable& table);

struct QuantilePair {
  int empirical = 0;
  int theoretical = 0;
};

/// Smallest observed value whose empirical cdf reaches q.
int empirical_quantile(const std::vector<int>& values, double q);

QuantilePair quantile_compare(const SpellSample& sample, const LerchDist& model,
                              double q = 0.99);
QuantilePair quantile_compare(const SpellSample& sample, const PmfTable& model,
                              double q = 0.99);

/// Standard error of estimate: root mean squared empirical-theoretical
/// difference over a collection of quantile pairs.
double see(const std::vector<QuantilePair>& pairs);

struct CumFreqPoint {
  int k = 0;
  double ratio = 0.0;  // F_spell(k) / F_chain(k)
};

/// Ratios of empirical cumulative relative frequencies on the support
/// where the chain cdf is positive.
std::vector<CumFreqPoint> cumfreq_ratio(const SpellSample& spell,
                                        const SpellSample& chain);

struct SummaryStats {
  int min = 0;
  int max = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> skewness;  // absent for constant or tiny samples
};

/// Quartiles by linear interpolation between order statistics at
/// position (n-1)p; dispersion and skewness by the usual unbiased
/// estimators.
SummaryStats summary_stats(const SpellSample& sample);

}  // namespace spellkit
