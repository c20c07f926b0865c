#include "spellkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "spellkit/special.hpp"

namespace spellkit {

namespace {

long long mk_s_impl(std::span<const double> x, bool parallel) {
  const long n = static_cast<long>(x.size());
  long long s = 0;
  if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : s)
    for (long i = 0; i < n - 1; ++i) {
      long long row = 0;
      for (long j = i + 1; j < n; ++j) {
        const double d = x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(i)];
        row += d > 0.0 ? 1 : d < 0.0 ? -1 : 0;
      }
      s += row;
    }
  } else {
    for (long i = 0; i < n - 1; ++i) {
      long long row = 0;
      for (long j = i + 1; j < n; ++j) {
        const double d = x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(i)];
        row += d > 0.0 ? 1 : d < 0.0 ? -1 : 0;
      }
      s += row;
    }
  }
  return s;
}

// Tie group sizes of the value multiset.
std::vector<long> tie_groups(std::span<const double> x) {
  std::map<double, long> freq;
  for (double v : x) ++freq[v];
  std::vector<long> t;
  for (const auto& [v, c] : freq)
    if (c > 1) t.push_back(c);
  return t;
}

double z_with_continuity(long long s, double var) {
  if (var <= 0.0) return 0.0;
  const double sd = std::sqrt(var);
  if (s > 0) return (static_cast<double>(s) - 1.0) / sd;
  if (s < 0) return (static_cast<double>(s) + 1.0) / sd;
  return 0.0;
}

// Average ranks, ties shared.
std::vector<double> ranks_of(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

TrendResult mk_core(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  TrendResult r;
  r.s = mk_s_statistic(x);

  const std::vector<long> ties = tie_groups(x);
  double tie_pairs = 0.0;
  double tie_var = 0.0;
  for (long t : ties) {
    const double td = static_cast<double>(t);
    tie_pairs += td * (td - 1.0) / 2.0;
    tie_var += td * (td - 1.0) * (2.0 * td + 5.0);
  }
  const double total_pairs = n * (n - 1.0) / 2.0;
  const double denom = std::sqrt((total_pairs - tie_pairs) * total_pairs);
  r.degenerate = total_pairs - tie_pairs <= 0.0;
  r.tau = r.degenerate ? 0.0 : static_cast<double>(r.s) / denom;
  r.var_s = (n * (n - 1.0) * (2.0 * n + 5.0) - tie_var) / 18.0;
  if (r.degenerate) r.var_s = 0.0;
  r.z = z_with_continuity(r.s, r.var_s);
  r.p_classical = r.degenerate ? 1.0 : normal_two_sided_p(r.z);

  r.var_corrected = r.var_s;
  r.z_corrected = r.z;
  r.p_corrected = r.p_classical;
  return r;
}

}  // namespace

long long mk_s_statistic(std::span<const double> series) {
  return mk_s_impl(series, true);
}

long long mk_s_statistic_serial(std::span<const double> series) {
  return mk_s_impl(series, false);
}

TrendResult mk_test(std::span<const double> series) {
  if (series.size() < 10)
    throw std::invalid_argument("mk_test: series length must be >= 10");
  return mk_core(series);
}

TrendResult mk_test_corrected(std::span<const double> series, int max_lag) {
  if (series.size() < 20)
    throw std::invalid_argument("mk_test_corrected: series length must be >= 20");
  if (max_lag < 1)
    throw std::invalid_argument("mk_test_corrected: max_lag must be >= 1");

  TrendResult r = mk_core(series);
  if (r.degenerate) return r;

  const std::vector<double> rank = ranks_of(series);
  const double n = static_cast<double>(rank.size());
  double mean = 0.0;
  for (double v : rank) mean += v;
  mean /= n;
  double denom = 0.0;
  for (double v : rank) denom += (v - mean) * (v - mean);

  const double sig_band = 1.96 / std::sqrt(n);
  const int lag_cap = std::min<int>(max_lag, static_cast<int>(rank.size()) - 3);
  double corr_sum = 0.0;
  int sig_lags = 0;
  for (int lag = 1; lag <= lag_cap; ++lag) {
    double num = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < rank.size(); ++t)
      num += (rank[t] - mean) * (rank[t + static_cast<std::size_t>(lag)] - mean);
    const double rho = denom > 0.0 ? num / denom : 0.0;
    if (std::fabs(rho) > sig_band) {
      const double ni = n - static_cast<double>(lag);
      corr_sum += ni * (ni - 1.0) * (ni - 2.0) * rho;
      ++sig_lags;
    }
  }

  r.significant_lags = sig_lags;
  r.correction_factor =
      std::max(1.0 + 2.0 / (n * (n - 1.0) * (n - 2.0)) * corr_sum, 1e-12);
  r.var_corrected = r.var_s * r.correction_factor;
  r.z_corrected = z_with_continuity(r.s, r.var_corrected);
  r.p_corrected = normal_two_sided_p(r.z_corrected);
  return r;
}

RatioSeries survival_ratios(const SpellSample& sample, int min_count) {
  if (sample.values.empty())
    throw std::invalid_argument("survival_ratios: empty sample");
  const int max_v = *std::max_element(sample.values.begin(), sample.values.end());
  std::vector<double> count(static_cast<std::size_t>(max_v) + 2, 0.0);
  for (int v : sample.values) count[static_cast<std::size_t>(v)] += 1.0;
  // S_r = #{values >= r}; suffix sums, S_{max+1} = 0.
  std::vector<double> s_r(static_cast<std::size_t>(max_v) + 2, 0.0);
  for (int r = max_v; r >= 1; --r)
    s_r[static_cast<std::size_t>(r)] =
        s_r[static_cast<std::size_t>(r) + 1] + count[static_cast<std::size_t>(r)];

  RatioSeries out;
  out.min_count = min_count;
  for (int r = 1; r <= max_v; ++r) {
    if (count[static_cast<std::size_t>(r)] < static_cast<double>(min_count)) continue;
    if (s_r[static_cast<std::size_t>(r)] <= 0.0) continue;
    out.points.push_back(RatioPoint{
        r, s_r[static_cast<std::size_t>(r) + 1] / s_r[static_cast<std::size_t>(r)]});
  }
  return out;
}

RatioSeries survival_ratios(const PmfTable& table) {
  RatioSeries out;
  out.min_count = 0;
  for (int r = 1; r <= table.max_k(); ++r) {
    const double s_r = table.survival(r - 1);   // P(X >= r)
    const double s_r1 = table.survival(r);      // P(X >= r+1)
    if (s_r <= 0.0) break;
    out.points.push_back(RatioPoint{r, s_r1 / s_r});
  }
  return out;
}

int empirical_quantile(const std::vector<int>& values, double q) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("empirical_quantile: q must be in (0, 1)");
  std::vector<int> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  // smallest value with ecdf >= q: order statistic at ceil(q n)
  const std::size_t idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(idx, 1) - 1];
}

QuantilePair quantile_compare(const SpellSample& sample, const LerchDist& model,
                              double q) {
  return QuantilePair{empirical_quantile(sample.values, q), model.quantile(q)};
}

QuantilePair quantile_compare(const SpellSample& sample, const PmfTable& model,
                              double q) {
  return QuantilePair{empirical_quantile(sample.values, q), model.quantile(q)};
}

double see(const std::vector<QuantilePair>& pairs) {
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double d = static_cast<double>(p.empirical - p.theoretical);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

std::vector<CumFreqPoint> cumfreq_ratio(const SpellSample& spell,
                                        const SpellSample& chain) {
  if (chain.values.empty())
    throw std::invalid_argument("cumfreq_ratio: empty chain sample");
  if (spell.values.empty())
    throw std::invalid_argument("cumfreq_ratio: empty spell sample");

  const auto ecdf = [](const std::vector<int>& v, int k) {
    long c = 0;
    for (int x : v)
      if (x <= k) ++c;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };

  const int k_max = *std::max_element(chain.values.begin(), chain.values.end());
  std::vector<CumFreqPoint> out;
  for (int k = 1; k <= k_max; ++k) {
    const double fc = ecdf(chain.values, k);
    if (fc <= 0.0) continue;
    out.push_back(CumFreqPoint{k, ecdf(spell.values, k) / fc});
  }
  return out;
}

SummaryStats summary_stats(const SpellSample& sample) {
  if (sample.values.empty())
    throw std::invalid_argument("summary_stats: empty sample");
  std::vector<int> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  const auto interp = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return static_cast<double>(sorted[n - 1]);
    return static_cast<double>(sorted[lo]) +
           frac * static_cast<double>(sorted[lo + 1] - sorted[lo]);
  };

  SummaryStats st;
  st.min = sorted.front();
  st.max = sorted.back();
  st.q1 = interp(0.25);
  st.median = interp(0.5);
  st.q3 = interp(0.75);

  double mean = 0.0;
  for (int v : sorted) mean += v;
  mean /= static_cast<double>(n);
  st.mean = mean;

  if (n < 2) return st;
  double m2 = 0.0, m3 = 0.0;
  for (int v : sorted) {
    const double d = static_cast<double>(v) - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double var = m2 / static_cast<double>(n - 1);
  st.stddev = std::sqrt(var);
  if (n >= 3 && st.stddev > 0.0) {
    const double nd = static_cast<double>(n);
    st.skewness = nd / ((nd - 1.0) * (nd - 2.0)) * m3 / (st.stddev * st.stddev * st.stddev);
  }
  return st;
}

}  // namespace spellkit
