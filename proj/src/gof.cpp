#include "spellkit/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spellkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> class_probs(const PmfTable& model, const Classes& classes) {
  std::vector<double> p(static_cast<std::size_t>(classes.count()));
  int lo = 1;
  for (std::size_t i = 0; i < classes.upper.size(); ++i) {
    const int hi = classes.upper[i];
    p[i] = std::max(0.0, model.cdf(hi) - model.cdf(lo - 1));
    lo = hi + 1;
  }
  p.back() = model.survival(classes.upper.back());
  return p;
}

double pearson(const std::vector<double>& observed,
               const std::vector<double>& expected) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] > 0.0) return kInf;
      continue;
    }
    const double d = observed[i] - expected[i];
    chi2 += d * d / expected[i];
  }
  return chi2;
}

struct ReplicateContext {
  const PmfTable* model;
  std::size_t n;
  std::vector<double> expected;  // N * P(class)
  std::vector<int> class_lut;    // value -> class index, tail beyond
  int tail_class;
  std::optional<Family> refit_family;
  FitOptions fit_options;
  Classes classes;
};

double one_replicate(const ReplicateContext& ctx, RngStream rng) {
  if (!ctx.refit_family) {
    std::vector<double> obs(ctx.expected.size(), 0.0);
    for (std::size_t i = 0; i < ctx.n; ++i) {
      const int v = ctx.model->sample_one(rng);
      const int c = v <= static_cast<int>(ctx.class_lut.size())
                        ? ctx.class_lut[static_cast<std::size_t>(v) - 1]
                        : ctx.tail_class;
      obs[static_cast<std::size_t>(c)] += 1.0;
    }
    return pearson(obs, ctx.expected);
  }

  // Parametric bootstrap: refit the family to the replicate sample and
  // compute the statistic against the refitted model.
  SpellSample rep;
  rep.values.resize(ctx.n);
  for (std::size_t i = 0; i < ctx.n; ++i) rep.values[i] = ctx.model->sample_one(rng);
  const FrequencyTable freq = FrequencyTable::from_values(rep.values);
  const FittedModel fit = fit_mle(rep, *ctx.refit_family, ctx.fit_options);
  const PmfTable refit_table = LerchDist(fit.params).table(1e-10);
  return chi2_statistic(freq, refit_table, ctx.classes);
}

GofResult mc_gof_impl(const std::vector<int>& values, const PmfTable& model,
                      const RngStream& rng, const GofOptions& options,
                      bool parallel) {
  if (values.empty()) throw std::invalid_argument("mc_gof: empty sample");
  if (options.replicates < 100)
    throw std::invalid_argument("mc_gof: at least 100 replicates required");

  FrequencyTable observed = FrequencyTable::from_values(values);
  if (options.smooth)
    observed = smooth_outliers(observed, options.gap_threshold);

  GofResult out;
  out.smoothed = options.smooth;
  out.classes = options.classes ? *options.classes
                                : Classes::for_model(model, values.size());
  out.chi2_ref = chi2_statistic(observed, model, out.classes);

  ReplicateContext ctx;
  ctx.model = &model;
  ctx.n = values.size();
  ctx.expected = class_probs(model, out.classes);
  for (double& e : ctx.expected) e *= static_cast<double>(ctx.n);
  ctx.tail_class = out.classes.count() - 1;
  ctx.class_lut.resize(static_cast<std::size_t>(out.classes.upper.back()));
  for (int v = 1; v <= out.classes.upper.back(); ++v)
    ctx.class_lut[static_cast<std::size_t>(v) - 1] = out.classes.index_of(v);
  ctx.refit_family = options.refit_family;
  ctx.fit_options = options.fit_options;
  ctx.classes = out.classes;

  const int r_count = options.replicates;
  out.replicate_stats.resize(static_cast<std::size_t>(r_count));
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < r_count; ++r)
      out.replicate_stats[static_cast<std::size_t>(r)] =
          one_replicate(ctx, rng.substream(static_cast<std::uint64_t>(r)));
  } else {
    for (int r = 0; r < r_count; ++r)
      out.replicate_stats[static_cast<std::size_t>(r)] =
          one_replicate(ctx, rng.substream(static_cast<std::uint64_t>(r)));
  }

  // Ties count as "not greater".
  long exceed = 0;
  for (double s : out.replicate_stats)
    if (s > out.chi2_ref) ++exceed;
  out.p_value = static_cast<double>(exceed) / static_cast<double>(r_count);
  return out;
}

}  // namespace

FrequencyTable FrequencyTable::from_values(const std::vector<int>& values) {
  if (values.empty()) throw std::invalid_argument("FrequencyTable: empty sample");
  int max_v = 0;
  for (int v : values) {
    if (v < 1) throw std::invalid_argument("FrequencyTable: values must be >= 1");
    max_v = std::max(max_v, v);
  }
  FrequencyTable t;
  t.counts.assign(static_cast<std::size_t>(max_v), 0.0);
  for (int v : values) t.counts[static_cast<std::size_t>(v) - 1] += 1.0;
  return t;
}

double FrequencyTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

Classes Classes::per_integer(int max_value) {
  if (max_value < 1) throw std::invalid_argument("Classes: max_value must be >= 1");
  Classes c;
  c.upper.resize(static_cast<std::size_t>(max_value));
  std::iota(c.upper.begin(), c.upper.end(), 1);
  return c;
}

Classes Classes::for_model(const PmfTable& model, std::size_t n) {
  if (n == 0) throw std::invalid_argument("Classes: empty sample");
  const double nd = static_cast<double>(n);
  int k = 1;
  while (k < model.max_k() && nd * model.survival(k) >= 1.0) ++k;
  return per_integer(k);
}

int Classes::index_of(int value) const {
  const auto it = std::lower_bound(upper.begin(), upper.end(), value);
  return static_cast<int>(it - upper.begin());  // == upper.size() -> tail
}

FrequencyTable smooth_outliers(const FrequencyTable& table, int gap_threshold,
                               double max_outlier_count) {
  if (gap_threshold < 1)
    throw std::invalid_argument("smooth_outliers: gap_threshold must be >= 1");
  FrequencyTable out = table;
  auto& c = out.counts;
  // Right-to-left: each outlier is smoothed against its own preceding
  // non-null anchor before anything below it changes.
  for (int v = out.max_value(); v >= 2; --v) {
    const double cv = c[static_cast<std::size_t>(v) - 1];
    if (cv <= 0.0 || cv > max_outlier_count) continue;
    int anchor = v - 1;
    while (anchor >= 1 && c[static_cast<std::size_t>(anchor) - 1] == 0.0) --anchor;
    const int gap = v - 1 - anchor;
    if (gap < gap_threshold) continue;
    const double share = cv / static_cast<double>(v - anchor);
    for (int k = anchor + 1; k <= v; ++k)
      c[static_cast<std::size_t>(k) - 1] =
          (k == v ? share : c[static_cast<std::size_t>(k) - 1] + share);
  }
  return out;
}

double chi2_statistic(const FrequencyTable& observed, const PmfTable& model,
                      const Classes& classes) {
  if (observed.counts.empty())
    throw std::invalid_argument("chi2_statistic: empty frequency table");
  const double n = observed.total();
  std::vector<double> obs(static_cast<std::size_t>(classes.count()), 0.0);
  for (int v = 1; v <= observed.max_value(); ++v)
    obs[static_cast<std::size_t>(classes.index_of(v))] +=
        observed.counts[static_cast<std::size_t>(v) - 1];
  std::vector<double> expected = class_probs(model, classes);
  for (double& e : expected) e *= n;
  return pearson(obs, expected);
}

GofResult mc_gof(const std::vector<int>& values, const PmfTable& model,
                 const RngStream& rng, const GofOptions& options) {
  return mc_gof_impl(values, model, rng, options, true);
}

GofResult mc_gof_serial(const std::vector<int>& values, const PmfTable& model,
                        const RngStream& rng, const GofOptions& options) {
  return mc_gof_impl(values, model, rng, options, false);
}

}  // namespace spellkit
