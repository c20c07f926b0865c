#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spellkit/rng.hpp"

namespace spellkit {

/// The Lerch family and its special cases, in decreasing number of free
/// parameters: theta is always free; the others are fixed per family.
enum class Family { lerch3, polylog, logarithmic, geometric, extended_log };

int free_param_count(Family f);
const char* family_name(Family f);
Family family_from_name(std::string_view name);

/// True when `sub` is a sub-model of `super` (reflexive). The order is
/// logarithmic < polylog < lerch3, geometric < polylog < lerch3, and
/// extended_log < lerch3.
bool nested_in(Family sub, Family super);

/// Parameters of the three-parameter law
///   p(k) = theta^(k-1) / ((k+a)^s * Phi(theta, s, a+1)),  k = 1, 2, ...
/// with 0 <= theta < 1, s real, a > -1. theta = 0 is the degenerate
/// point-mass-at-1 limit and is accepted everywhere in evaluation.
struct LerchParams {
  double theta = 0.5;
  double s = 0.0;
  double a = 0.0;

  static LerchParams lerch3(double theta, double s, double a) { return {theta, s, a}; }
  static LerchParams polylog(double theta, double s) { return {theta, s, 0.0}; }
  static LerchParams logarithmic(double theta) { return {theta, 1.0, 0.0}; }
  static LerchParams geometric(double theta) { return {theta, 0.0, 1.0}; }
  static LerchParams extended_log(double theta, double a) { return {theta, 1.0, a}; }
};

/// Throws std::invalid_argument unless 0 <= theta < 1 and a > -1.
void validate(const LerchParams& p);

/// True when the fixed fields of `f` hold exactly in `p`.
bool conforms_to(const LerchParams& p, Family f);

/// Lerch transcendent Phi(theta, s, x) = sum_{n>=0} theta^n / (n+x)^s for
/// 0 <= theta < 1, x > 0, any real s. Plain series with a certified
/// geometric tail bound as stopping rule (relative truncation < 1e-12);
/// throws NonConvergenceError past the term cap.
double phi(double theta, double s, double x);

/// sum_{n>=0} theta^n * ln(n+x) / (n+x)^s; the s-derivative series of
/// -phi, needed for E[ln(a+X)].
double phi_log_weighted(double theta, double s, double x);

/// A probability mass function on {1, 2, ...} truncated at max_k() with
/// the remaining mass recorded explicitly. The common currency for
/// derived distributions (chains, recovered inter-arrival laws).
class PmfTable {
 public:
  /// probs[i] is P(X = i+1); tail is P(X > probs.size()), clamped at 0.
  PmfTable(std::vector<double> probs, double tail);

  int max_k() const { return static_cast<int>(probs_.size()); }
  double at(int k) const;  // 0 outside [1, max_k()]
  double tail_mass() const { return tail_; }
  const std::vector<double>& probs() const { return probs_; }

  double cdf(int k) const;       // P(X <= k), 0 for k < 1
  double survival(int r) const;  // P(X > r), includes tail mass
  double total() const;          // sum of probs + tail
  double mean() const;           // table part only; tail contributes nothing

  /// Smallest k with cdf(k) >= q; max_k()+1 when the mass inside the
  /// table is insufficient (only possible when q > 1 - tail).
  int quantile(double q) const;

  /// Inverse-cdf draw; a draw landing in the tail maps to max_k()+1.
  int sample_one(RngStream& rng) const;
  std::vector<int> sample(RngStream& rng, std::size_t n) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cum_;     // forward prefix sums
  std::vector<double> suffix_;  // suffix_[i] = sum_{j >= i} probs_[j] + tail
  double tail_;
};

/// Evaluation object for one parameter vector; caches the normalizing
/// constant. Immutable and safe for concurrent use.
class LerchDist {
 public:
  explicit LerchDist(LerchParams p);

  const LerchParams& params() const { return p_; }

  double pmf(int k) const;
  double log_pmf(int k) const;
  double cdf(int k) const;

  /// P(X > r) = theta^r * Phi(theta, s, a+r+1) / Phi(theta, s, a+1).
  double survival(int r) const;

  /// P(X = r | X >= r) = 1 / ((a+r)^s * Phi(theta, s, a+r)).
  double hazard(int r) const;

  /// Smallest k with cdf(k) >= q, 0 < q < 1.
  int quantile(double q) const;

  double mean() const;              // E[X]
  double mean_log_shifted() const;  // E[ln(a+X)]
  double mean_inv_shifted() const;  // E[1/(a+X)]

  /// Truncate so that survival(max_k) < tail_eps, tail recorded.
  PmfTable table(double tail_eps = 1e-10) const;

  /// n inverse-cdf draws from a precomputed table; draws beyond the
  /// table continue the exact pmf walk into the tail.
  std::vector<int> sample(RngStream& rng, std::size_t n) const;

 private:
  LerchParams p_;
  double norm_;      // Phi(theta, s, a+1)
  double log_norm_;  // ln of the above
};

}  // namespace spellkit
