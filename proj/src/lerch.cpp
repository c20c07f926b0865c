#include "spellkit/lerch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spellkit/errors.hpp"

namespace spellkit {

namespace {

constexpr long kTermCap = 10'000'000;
constexpr double kRelTol = 1e-14;

}  // namespace

int free_param_count(Family f) {
  switch (f) {
    case Family::lerch3: return 3;
    case Family::polylog: return 2;
    case Family::logarithmic: return 1;
    case Family::geometric: return 1;
    case Family::extended_log: return 2;
  }
  throw std::invalid_argument("unknown family");
}

const char* family_name(Family f) {
  switch (f) {
    case Family::lerch3: return "lerch3";
    case Family::polylog: return "polylog";
    case Family::logarithmic: return "logarithmic";
    case Family::geometric: return "geometric";
    case Family::extended_log: return "extended_log";
  }
  throw std::invalid_argument("unknown family");
}

Family family_from_name(std::string_view name) {
  if (name == "lerch3") return Family::lerch3;
  if (name == "polylog") return Family::polylog;
  if (name == "logarithmic") return Family::logarithmic;
  if (name == "geometric") return Family::geometric;
  if (name == "extended_log") return Family::extended_log;
  throw std::invalid_argument("unknown family name: " + std::string(name));
}

bool nested_in(Family sub, Family super) {
  if (sub == super) return true;
  if (super == Family::lerch3) return true;
  if (super == Family::polylog)
    return sub == Family::logarithmic || sub == Family::geometric;
  return false;
}

void validate(const LerchParams& p) {
  if (!(p.theta >= 0.0 && p.theta < 1.0))
    throw std::invalid_argument("LerchParams: theta must be in [0, 1)");
  if (!(p.a > -1.0))
    throw std::invalid_argument("LerchParams: a must be > -1");
  if (!std::isfinite(p.s))
    throw std::invalid_argument("LerchParams: s must be finite");
}

bool conforms_to(const LerchParams& p, Family f) {
  switch (f) {
    case Family::lerch3: return true;
    case Family::polylog: return p.a == 0.0;
    case Family::logarithmic: return p.s == 1.0 && p.a == 0.0;
    case Family::geometric: return p.s == 0.0 && p.a == 1.0;
    case Family::extended_log: return p.s == 1.0;
  }
  return false;
}

double phi(double theta, double s, double x) {
  if (!(theta >= 0.0 && theta < 1.0))
    throw std::invalid_argument("phi: theta must be in [0, 1)");
  if (!(x > 0.0)) throw std::invalid_argument("phi: x must be > 0");

  if (s == 0.0) return 1.0 / (1.0 - theta);  // plain geometric series

  double sum = std::pow(x, -s);
  if (theta == 0.0) return sum;

  // Kahan compensation keeps accumulated rounding below the truncation
  // bound even for thousands of terms.
  double comp = 0.0;
  double pow_theta = 1.0;
  for (long n = 1; n <= kTermCap; ++n) {
    pow_theta *= theta;
    const double term = pow_theta * std::pow(n + x, -s);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    // Consecutive-term ratio is bounded by theta for s >= 0 and by the
    // ratio at the current index for s < 0 (it decreases toward theta),
    // so the remainder is below next_term / (1 - q) whenever q < 1.
    const double q =
        s >= 0.0 ? theta : theta * std::pow((n + 1 + x) / (n + x), -s);
    if (q < 1.0) {
      const double next = pow_theta * theta * std::pow(n + 1 + x, -s);
      if (next / (1.0 - q) <= kRelTol * sum) return sum;
    }
  }
  const double q = s >= 0.0 ? theta : 1.0;
  const double bound =
      q < 1.0 ? pow_theta * theta * std::pow(kTermCap + 1 + x, -s) / (1.0 - q)
              : std::numeric_limits<double>::infinity();
  throw NonConvergenceError("phi: series did not converge within term cap", sum, bound);
}

double phi_log_weighted(double theta, double s, double x) {
  if (!(theta >= 0.0 && theta < 1.0))
    throw std::invalid_argument("phi_log_weighted: theta must be in [0, 1)");
  if (!(x > 0.0)) throw std::invalid_argument("phi_log_weighted: x must be > 0");

  // Only the n = 0 term can be non-positive (x <= 1); terms for n >= 1
  // have ln(n+x) > 0 and an eventually geometric decay.
  double sum = std::log(x) * std::pow(x, -s);
  if (theta == 0.0) return sum;

  double sum_abs = std::fabs(sum);
  double pow_theta = 1.0;
  for (long n = 1; n <= kTermCap; ++n) {
    pow_theta *= theta;
    const double term = pow_theta * std::log(n + x) * std::pow(n + x, -s);
    sum += term;
    sum_abs += term;
    if (n >= 1) {
      // Envelope on later term ratios: the log factor decreases toward 1,
      // the power factor is <= 1 for s >= 0 and decreases for s < 0.
      double q = theta * (std::log(n + 2 + x) / std::log(n + 1 + x));
      if (s < 0.0) q *= std::pow((n + 2 + x) / (n + 1 + x), -s);
      if (q < 1.0) {
        const double next =
            pow_theta * theta * std::log(n + 1 + x) * std::pow(n + 1 + x, -s);
        if (next / (1.0 - q) <= kRelTol * std::max(sum_abs, 1e-300)) return sum;
      }
    }
  }
  throw NonConvergenceError("phi_log_weighted: series did not converge", sum, 0.0);
}

// ---------------------------------------------------------------------------
// PmfTable

PmfTable::PmfTable(std::vector<double> probs, double tail)
    : probs_(std::move(probs)), tail_(std::max(tail, 0.0)) {
  if (probs_.empty()) throw std::invalid_argument("PmfTable: empty table");
  cum_.resize(probs_.size());
  double c = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0))
      throw std::invalid_argument("PmfTable: negative probability");
    c += probs_[i];
    cum_[i] = c;
  }
  // Backward sums keep deep survival values free of cancellation.
  suffix_.resize(probs_.size() + 1);
  suffix_.back() = tail_;
  for (std::size_t i = probs_.size(); i-- > 0;)
    suffix_[i] = suffix_[i + 1] + probs_[i];
}

double PmfTable::at(int k) const {
  if (k < 1 || k > max_k()) return 0.0;
  return probs_[static_cast<std::size_t>(k) - 1];
}

double PmfTable::cdf(int k) const {
  if (k < 1) return 0.0;
  if (k >= max_k()) return cum_.back();
  return cum_[static_cast<std::size_t>(k) - 1];
}

double PmfTable::survival(int r) const {
  if (r < 0) return total();
  if (r >= max_k()) return tail_;
  return suffix_[static_cast<std::size_t>(r)];
}

double PmfTable::total() const { return cum_.back() + tail_; }

double PmfTable::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i)
    m += static_cast<double>(i + 1) * probs_[i];
  return m;
}

int PmfTable::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("PmfTable::quantile: q must be in (0, 1)");
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), q);
  if (it == cum_.end()) return max_k() + 1;
  return static_cast<int>(it - cum_.begin()) + 1;
}

int PmfTable::sample_one(RngStream& rng) const {
  const double u = rng.uniform() * total();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) return max_k() + 1;  // tail draw
  return static_cast<int>(it - cum_.begin()) + 1;
}

std::vector<int> PmfTable::sample(RngStream& rng, std::size_t n) const {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sample_one(rng);
  return out;
}

// ---------------------------------------------------------------------------
// LerchDist

LerchDist::LerchDist(LerchParams p) : p_(p) {
  validate(p_);
  norm_ = phi(p_.theta, p_.s, p_.a + 1.0);
  log_norm_ = std::log(norm_);
}

double LerchDist::log_pmf(int k) const {
  if (k < 1) throw std::invalid_argument("log_pmf: k must be >= 1");
  if (p_.theta == 0.0)
    return k == 1 ? 0.0 : -std::numeric_limits<double>::infinity();
  return (k - 1) * std::log(p_.theta) - p_.s * std::log(k + p_.a) - log_norm_;
}

double LerchDist::pmf(int k) const { return std::exp(log_pmf(k)); }

double LerchDist::survival(int r) const {
  if (r < 0) throw std::invalid_argument("survival: r must be >= 0");
  if (r == 0) return 1.0;
  if (p_.theta == 0.0) return 0.0;
  return std::exp(r * std::log(p_.theta) +
                  std::log(phi(p_.theta, p_.s, p_.a + r + 1.0)) - log_norm_);
}

double LerchDist::cdf(int k) const {
  if (k < 1) return 0.0;
  return 1.0 - survival(k);
}

double LerchDist::hazard(int r) const {
  if (r < 1) throw std::invalid_argument("hazard: r must be >= 1");
  if (p_.theta == 0.0) return 1.0;  // point mass at 1 always terminates
  return 1.0 / (std::pow(r + p_.a, p_.s) * phi(p_.theta, p_.s, p_.a + r));
}

int LerchDist::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("quantile: q must be in (0, 1)");
  if (p_.theta == 0.0) return 1;
  // Scan the cumulative sum using the pmf recurrence
  // p(k+1) = p(k) * theta * ((k+a)/(k+1+a))^s.
  double pk = pmf(1);
  double cum = pk;
  int k = 1;
  while (cum < q) {
    if (k >= kTermCap)
      throw NonConvergenceError("quantile: scan exceeded term cap", cum, 1.0 - cum);
    pk *= p_.theta * std::pow((k + p_.a) / (k + 1 + p_.a), p_.s);
    cum += pk;
    ++k;
  }
  return k;
}

double LerchDist::mean() const {
  // E[X] = Phi(theta, s-1, a+1) / Phi(theta, s, a+1) - a, from k = (k+a) - a.
  return phi(p_.theta, p_.s - 1.0, p_.a + 1.0) / norm_ - p_.a;
}

double LerchDist::mean_log_shifted() const {
  return phi_log_weighted(p_.theta, p_.s, p_.a + 1.0) / norm_;
}

double LerchDist::mean_inv_shifted() const {
  return phi(p_.theta, p_.s + 1.0, p_.a + 1.0) / norm_;
}

PmfTable LerchDist::table(double tail_eps) const {
  if (!(tail_eps > 0.0 && tail_eps <= 1e-6))
    throw std::invalid_argument("table: tail_eps must be in (0, 1e-6]");
  if (p_.theta == 0.0) return PmfTable({1.0}, 0.0);

  // Find the smallest K with survival(K) < tail_eps: exponential search
  // then bisection; survival is strictly decreasing.
  int hi = 1;
  while (survival(hi) >= tail_eps) {
    if (hi > (1 << 26))
      throw NonConvergenceError("table: truncation point too large", 0.0, survival(hi));
    hi *= 2;
  }
  int lo = hi / 2;  // survival(lo) >= tail_eps or lo == 0
  while (lo + 1 < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (survival(mid) < tail_eps)
      hi = mid;
    else
      lo = mid;
  }
  const int k_max = hi;

  std::vector<double> probs(static_cast<std::size_t>(k_max));
  double pk = pmf(1);
  probs[0] = pk;
  for (int k = 1; k < k_max; ++k) {
    pk *= p_.theta * std::pow((k + p_.a) / (k + 1 + p_.a), p_.s);
    probs[static_cast<std::size_t>(k)] = pk;
  }
  return PmfTable(std::move(probs), survival(k_max));
}

std::vector<int> LerchDist::sample(RngStream& rng, std::size_t n) const {
  const PmfTable tab = table(1e-10);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < tab.cdf(tab.max_k())) {
      // smallest k with cdf(k) > u
      int lo = 1, hi = tab.max_k();
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (tab.cdf(mid) > u)
          hi = mid;
        else
          lo = mid + 1;
      }
      out[i] = lo;
    } else {
      // Tail draw: continue the exact pmf walk beyond the table. The
      // geometric tail envelope guarantees termination for theta < 1.
      int k = tab.max_k();
      double cum = tab.cdf(k);
      double pk = pmf(k);
      while (cum < u) {
        pk *= p_.theta * std::pow((k + p_.a) / (k + 1 + p_.a), p_.s);
        ++k;
        cum += pk;
        if (k > (1 << 28)) break;  // cannot happen for theta < 1
      }
      out[i] = k;
    }
  }
  return out;
}

}  // namespace spellkit
