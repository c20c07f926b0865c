#include "spellkit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "spellkit/errors.hpp"
#include "spellkit/rng.hpp"
#include "spellkit/special.hpp"

namespace spellkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-4;      // finite-difference step, transformed space
constexpr double kGradTol = 1e-6;     // convergence flag threshold (mean loglik)
constexpr double kThetaCeil = 0.9999; // objective barrier; keeps phi cheap

struct SuffStats {
  std::vector<std::pair<int, double>> counts;  // (value, multiplicity)
  double n = 0.0;
  double sum_v = 0.0;
};

SuffStats make_stats(const SpellSample& sample) {
  std::map<int, double> freq;
  for (int v : sample.values) {
    if (v < 1) throw std::invalid_argument("sample values must be >= 1");
    freq[v] += 1.0;
  }
  SuffStats st;
  st.counts.assign(freq.begin(), freq.end());
  st.n = static_cast<double>(sample.values.size());
  for (const auto& [v, c] : st.counts) st.sum_v += v * c;
  return st;
}

double loglik_from_stats(const LerchParams& p, const SuffStats& st) {
  if (p.theta == 0.0)
    return st.sum_v == st.n ? 0.0 : -kInf;
  double sum_log_shift = 0.0;
  for (const auto& [v, c] : st.counts) sum_log_shift += c * std::log(v + p.a);
  return (st.sum_v - st.n) * std::log(p.theta) - p.s * sum_log_shift -
         st.n * std::log(phi(p.theta, p.s, p.a + 1.0));
}

SampleMoments moments_at(const SuffStats& st, double a) {
  SampleMoments m;
  for (const auto& [v, c] : st.counts) {
    m.mean += c * v;
    m.mean_log_shifted += c * std::log(v + a);
    m.mean_inv_shifted += c / (v + a);
  }
  m.mean /= st.n;
  m.mean_log_shifted /= st.n;
  m.mean_inv_shifted /= st.n;
  return m;
}

// --- transformed coordinates -----------------------------------------------
// z0 = logit(theta); z1 = log(s) or s; z2 = log(1 + a). Each family
// optimizes only its free coordinates.

struct Transform {
  Family family;
  bool s_nonneg;

  int dim() const {
    switch (family) {
      case Family::lerch3: return 3;
      case Family::polylog: return 2;
      case Family::extended_log: return 2;
      case Family::logarithmic: return 1;
      case Family::geometric: return 1;
    }
    return 0;
  }

  LerchParams params(const std::vector<double>& z) const {
    const double theta = 1.0 / (1.0 + std::exp(-z[0]));
    switch (family) {
      case Family::lerch3:
        return {theta, s_value(z[1]), std::expm1(z[2])};
      case Family::polylog:
        return {theta, s_value(z[1]), 0.0};
      case Family::extended_log:
        return {theta, 1.0, std::expm1(z[1])};
      case Family::logarithmic:
        return {theta, 1.0, 0.0};
      case Family::geometric:
        return {theta, 0.0, 1.0};
    }
    throw std::invalid_argument("unknown family");
  }

  std::vector<double> z_from(const LerchParams& p) const {
    std::vector<double> z;
    z.push_back(std::log(p.theta / (1.0 - p.theta)));
    switch (family) {
      case Family::lerch3:
        z.push_back(s_coord(p.s));
        z.push_back(std::log1p(p.a));
        break;
      case Family::polylog:
        z.push_back(s_coord(p.s));
        break;
      case Family::extended_log:
        z.push_back(std::log1p(p.a));
        break;
      default:
        break;
    }
    return z;
  }

  double s_value(double z) const { return s_nonneg ? std::exp(z) : z; }
  double s_coord(double s) const { return s_nonneg ? std::log(std::max(s, 1e-8)) : s; }

  // Jacobian diagonal d(param)/dz for the free coordinates, used to map
  // standard errors back to the raw parameters.
  std::vector<std::pair<int, double>> jacobian(const LerchParams& p) const {
    std::vector<std::pair<int, double>> j;  // (raw index 0=theta,1=s,2=a, dparam/dz)
    j.emplace_back(0, p.theta * (1.0 - p.theta));
    switch (family) {
      case Family::lerch3:
        j.emplace_back(1, s_nonneg ? p.s : 1.0);
        j.emplace_back(2, 1.0 + p.a);
        break;
      case Family::polylog:
        j.emplace_back(1, s_nonneg ? p.s : 1.0);
        break;
      case Family::extended_log:
        j.emplace_back(2, 1.0 + p.a);
        break;
      default:
        break;
    }
    return j;
  }
};

// Mean negative log-likelihood with barriers keeping the series cheap.
double objective(const Transform& tr, const SuffStats& st,
                 const std::vector<double>& z) {
  for (double zi : z)
    if (!std::isfinite(zi)) return 1e100;
  const LerchParams p = tr.params(z);
  if (!(p.theta > 0.0) || p.theta > kThetaCeil) return 1e100;
  if (!(p.a > -1.0 + 1e-12) || p.a > 1e8) return 1e100;
  if (std::fabs(p.s) > 60.0) return 1e100;
  const double ll = loglik_from_stats(p, st);
  if (!std::isfinite(ll)) return 1e100;
  return -ll / st.n;
}

std::vector<double> fd_gradient(const Transform& tr, const SuffStats& st,
                                const std::vector<double>& z, double h) {
  std::vector<double> g(z.size());
  std::vector<double> zp = z;
  for (std::size_t i = 0; i < z.size(); ++i) {
    zp[i] = z[i] + h;
    const double fp = objective(tr, st, zp);
    zp[i] = z[i] - h;
    const double fm = objective(tr, st, zp);
    zp[i] = z[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct BfgsResult {
  std::vector<double> z;
  double f = kInf;
  double grad_norm = kInf;
  bool converged = false;
};

// Compact dense BFGS (dim <= 3) with Armijo backtracking.
BfgsResult bfgs_minimize(const Transform& tr, const SuffStats& st,
                         std::vector<double> z, int max_iter = 250) {
  const std::size_t d = z.size();
  std::vector<std::vector<double>> h_inv(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) h_inv[i][i] = 1.0;

  double f = objective(tr, st, z);
  std::vector<double> g = fd_gradient(tr, st, z, kFdStep);

  BfgsResult best{z, f, max_norm(g), max_norm(g) < kGradTol};
  if (best.converged) return best;

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<double> dir(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) dir[i] -= h_inv[i][j] * g[j];

    double slope = 0.0;
    for (std::size_t i = 0; i < d; ++i) slope += dir[i] * g[i];
    if (slope >= 0.0) {  // not a descent direction; reset to steepest
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) h_inv[i][j] = 0.0;
        h_inv[i][i] = 1.0;
        dir[i] = -g[i];
      }
      slope = 0.0;
      for (std::size_t i = 0; i < d; ++i) slope += dir[i] * g[i];
      if (slope >= 0.0) break;
    }

    double step = 1.0;
    std::vector<double> z_new(d);
    double f_new = kInf;
    bool moved = false;
    for (int ls = 0; ls < 45; ++ls) {
      for (std::size_t i = 0; i < d; ++i) z_new[i] = z[i] + step * dir[i];
      f_new = objective(tr, st, z_new);
      if (f_new <= f + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;

    std::vector<double> g_new = fd_gradient(tr, st, z_new, kFdStep);
    std::vector<double> sk(d), yk(d);
    for (std::size_t i = 0; i < d; ++i) {
      sk[i] = z_new[i] - z[i];
      yk[i] = g_new[i] - g[i];
    }
    double sy = 0.0;
    for (std::size_t i = 0; i < d; ++i) sy += sk[i] * yk[i];
    if (sy > 1e-12) {
      // standard BFGS inverse update
      std::vector<double> hy(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) hy[i] += h_inv[i][j] * yk[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < d; ++i) yhy += yk[i] * hy[i];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          h_inv[i][j] += (sy + yhy) * sk[i] * sk[j] / (sy * sy) -
                         (hy[i] * sk[j] + sk[i] * hy[j]) / sy;
    }

    z = z_new;
    f = f_new;
    g = g_new;

    const double gn = max_norm(g);
    if (f < best.f) best = BfgsResult{z, f, gn, gn < kGradTol};
    if (gn < 1e-8) break;
  }

  const double gn = max_norm(g);
  if (f <= best.f) best = BfgsResult{z, f, gn, gn < kGradTol};
  best.converged = best.grad_norm < kGradTol;
  return best;
}

// Observed-information standard errors by central second differences of
// the total negative log-likelihood in transformed coordinates.
std::array<std::optional<double>, 3> observed_info_se(const Transform& tr,
                                                      const SuffStats& st,
                                                      const std::vector<double>& z,
                                                      const LerchParams& p) {
  const std::size_t d = z.size();
  const double h = kFdStep;
  std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
  const double f0 = objective(tr, st, z) * st.n;
  std::vector<double> zp = z;
  for (std::size_t i = 0; i < d; ++i) {
    zp[i] = z[i] + h;
    const double fp = objective(tr, st, zp) * st.n;
    zp[i] = z[i] - h;
    const double fm = objective(tr, st, zp) * st.n;
    zp[i] = z[i];
    hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      std::vector<double> zz = z;
      zz[i] += h; zz[j] += h;
      const double fpp = objective(tr, st, zz) * st.n;
      zz[j] -= 2.0 * h;
      const double fpm = objective(tr, st, zz) * st.n;
      zz[i] -= 2.0 * h;
      const double fmm = objective(tr, st, zz) * st.n;
      zz[j] += 2.0 * h;
      const double fmp = objective(tr, st, zz) * st.n;
      hess[i][j] = hess[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }

  // invert by Gauss-Jordan with partial pivoting
  std::vector<std::vector<double>> inv(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::fabs(hess[r][col]) > std::fabs(hess[piv][col])) piv = r;
    if (std::fabs(hess[piv][col]) < 1e-300) return {};  // singular
    std::swap(hess[piv], hess[col]);
    std::swap(inv[piv], inv[col]);
    const double pivot = hess[col][col];
    for (std::size_t j = 0; j < d; ++j) {
      hess[col][j] /= pivot;
      inv[col][j] /= pivot;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double m = hess[r][col];
      for (std::size_t j = 0; j < d; ++j) {
        hess[r][j] -= m * hess[col][j];
        inv[r][j] -= m * inv[col][j];
      }
    }
  }

  std::array<std::optional<double>, 3> se;
  const auto jac = tr.jacobian(p);
  for (std::size_t i = 0; i < d; ++i) {
    const double var_z = inv[i][i];
    if (!(var_z > 0.0)) return {};
    se[static_cast<std::size_t>(jac[i].first)] =
        std::sqrt(var_z) * std::fabs(jac[i].second);
  }
  return se;
}

FittedModel degenerate_fit(const SpellSample& sample, Family family,
                           const SuffStats& st) {
  FittedModel fm;
  fm.family = family;
  // theta at the lower boundary with the family's fixed fields kept.
  switch (family) {
    case Family::lerch3: fm.params = {0.0, 1.0, 0.0}; break;
    case Family::polylog: fm.params = {0.0, 1.0, 0.0}; break;
    case Family::logarithmic: fm.params = {0.0, 1.0, 0.0}; break;
    case Family::geometric: fm.params = {0.0, 0.0, 1.0}; break;
    case Family::extended_log: fm.params = {0.0, 1.0, 0.0}; break;
  }
  fm.loglik = 0.0;  // point mass at 1 reproduces the sample exactly
  fm.n = sample.n();
  fm.converged = false;
  fm.boundary = true;
  fm.sample_moments = moments_at(st, fm.params.a);
  fm.warnings.push_back("degenerate sample (all values 1): theta at lower boundary");
  return fm;
}

}  // namespace

double log_likelihood(const LerchParams& params, const SpellSample& sample) {
  validate(params);
  if (sample.values.empty())
    throw std::invalid_argument("log_likelihood: empty sample");
  return loglik_from_stats(params, make_stats(sample));
}

FittedModel fit_mle(const SpellSample& sample, Family family,
                    const FitOptions& options) {
  if (sample.n() < 10)
    throw std::invalid_argument(
        "fit_mle: sample size " + std::to_string(sample.n()) +
        " is below the minimum of 10 for variable " +
        variable_name(sample.variable));
  const SuffStats st = make_stats(sample);

  if (st.sum_v == st.n) return degenerate_fit(sample, family, st);

  std::vector<std::string> warnings;
  if (sample.n() < 30)
    warnings.push_back("small sample (n < 30): estimates may be unstable");

  const double mean = st.sum_v / st.n;

  if (family == Family::geometric) {
    // Closed form: theta = (mean - 1) / mean.
    FittedModel fm;
    fm.family = family;
    fm.params = LerchParams::geometric((mean - 1.0) / mean);
    fm.loglik = loglik_from_stats(fm.params, st);
    fm.n = sample.n();
    fm.converged = true;
    fm.sample_moments = moments_at(st, 1.0);
    fm.warnings = warnings;
    const Transform tr{family, options.s_nonneg};
    fm.std_errors = observed_info_se(tr, st, tr.z_from(fm.params), fm.params);
    return fm;
  }

  const Transform tr{family, options.s_nonneg};

  // Moment-based start plus seed-derived jitters.
  LerchParams start;
  const double theta0 = std::clamp((mean - 1.0) / mean, 0.05, 0.95);
  switch (family) {
    case Family::lerch3: start = LerchParams::lerch3(theta0, 1.0, 0.0); break;
    case Family::polylog: start = LerchParams::polylog(theta0, 1.0); break;
    case Family::logarithmic: start = LerchParams::logarithmic(theta0); break;
    case Family::extended_log: start = LerchParams::extended_log(theta0, 1.0); break;
    case Family::geometric: break;  // handled above
  }
  const std::vector<double> z0 = tr.z_from(start);

  RngStream jitter(options.seed, 0x17e5c4b3ULL + static_cast<std::uint64_t>(family));
  BfgsResult best;
  for (int s_idx = 0; s_idx < std::max(1, options.starts); ++s_idx) {
    std::vector<double> z = z0;
    if (s_idx > 0)
      for (double& zi : z) zi += (jitter.uniform() * 2.0 - 1.0) * 1.5;
    const BfgsResult res = bfgs_minimize(tr, st, z);
    if (res.f < best.f) best = res;
  }

  FittedModel fm;
  fm.family = family;
  fm.params = tr.params(best.z);
  fm.loglik = -best.f * st.n;
  fm.n = sample.n();
  fm.converged = best.converged;
  fm.grad_norm = best.grad_norm;
  fm.boundary = fm.params.theta < 1e-8;
  fm.sample_moments = moments_at(st, fm.params.a);
  fm.warnings = warnings;
  if (!fm.converged)
    fm.warnings.push_back("optimizer did not reach gradient tolerance; "
                          "best-found parameters reported");
  fm.std_errors = observed_info_se(tr, st, best.z, fm.params);
  return fm;
}

LlrResult llr_test(const FittedModel& null_fit, const FittedModel& alt_fit) {
  if (!nested_in(null_fit.family, alt_fit.family))
    throw std::invalid_argument("llr_test: null family not nested in alternative");
  if (null_fit.n != alt_fit.n)
    throw std::invalid_argument("llr_test: fits come from different samples");

  LlrResult r;
  r.d = -2.0 * (null_fit.loglik - alt_fit.loglik);
  r.df = free_param_count(alt_fit.family) - free_param_count(null_fit.family);
  if (r.d < -1e-6)
    throw InconsistentFitsError(
        "llr_test: alternative fit has lower likelihood than nested null (D = " +
        std::to_string(r.d) + ")");
  if (r.df == 0) {
    r.p = r.d <= 1e-9 ? 1.0 : 0.0;
    return r;
  }
  r.p = chi_squared_sf(std::max(r.d, 0.0), r.df);
  return r;
}

SelectionResult select_model(const SpellSample& sample, double alpha,
                             const FitOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("select_model: alpha must be in (0, 1)");
  if (sample.n() < 10)
    throw std::invalid_argument(
        "select_model: sample size " + std::to_string(sample.n()) +
        " is below the minimum of 10 for variable " +
        variable_name(sample.variable));

  const Family order[] = {Family::lerch3, Family::polylog, Family::logarithmic,
                          Family::geometric, Family::extended_log};

  SelectionTrace trace;
  std::optional<FittedModel> full;
  for (Family f : order) {
    SelectionEntry e;
    e.family = f;
    try {
      e.fit = fit_mle(sample, f, options);
      if (f == Family::lerch3) full = e.fit;
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    trace.entries.push_back(std::move(e));
  }

  for (auto& e : trace.entries) {
    if (!e.fit || e.family == Family::lerch3) continue;
    if (!full || !full->converged) {
      e.decision = "no converged full model to test against";
      continue;
    }
    try {
      LlrResult lr = llr_test(*e.fit, *full);
      e.vs_full = lr;
      e.rejected = lr.p < alpha;
      e.decision = e.rejected ? "rejected against full model" : "not rejected";
    } catch (const InconsistentFitsError& ex) {
      // Sub-model beat the full model by more than slack: clearly not
      // rejected, but flag the optimizer inconsistency in the trace.
      e.rejected = false;
      e.decision = "not rejected";
      e.error = ex.what();
    }
  }

  // Parsimony rule over converged, not-rejected candidates; the full
  // model enters with 3 parameters so it wins only when all sub-models
  // are rejected or unusable.
  const FittedModel* chosen = nullptr;
  for (const auto& e : trace.entries) {
    if (!e.fit || !e.fit->converged) continue;
    if (e.family != Family::lerch3 && e.rejected) continue;
    if (!chosen) {
      chosen = &*e.fit;
      continue;
    }
    const int pc = free_param_count(e.family);
    const int pb = free_param_count(chosen->family);
    if (pc < pb || (pc == pb && e.fit->loglik > chosen->loglik)) chosen = &*e.fit;
  }
  if (!chosen) {
    // Nothing converged; fall back to the best-likelihood fit available.
    for (const auto& e : trace.entries)
      if (e.fit && (!chosen || e.fit->loglik > chosen->loglik)) chosen = &*e.fit;
  }
  if (!chosen) throw std::runtime_error("select_model: no family could be fitted");

  trace.chosen = chosen->family;
  return SelectionResult{*chosen, std::move(trace)};
}

}  // namespace spellkit
