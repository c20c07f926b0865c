#include "spellkit/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spellkit/errors.hpp"

namespace spellkit {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(s, x); converges fast for x < s + 1.
double gamma_p_series(double s, double x) {
  double ap = s;
  double sum = 1.0 / s;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps)
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw NonConvergenceError("gamma_p series did not converge", sum, del);
}

// Modified Lentz continued fraction for Q(s, x); converges fast for x >= s + 1.
double gamma_q_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps)
      return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw NonConvergenceError("gamma_q continued fraction did not converge", h, 0.0);
}

}  // namespace

double gamma_p(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0))
    throw std::invalid_argument("gamma_p: requires s > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  return x < s + 1.0 ? gamma_p_series(s, x) : 1.0 - gamma_q_cf(s, x);
}

double gamma_q(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0))
    throw std::invalid_argument("gamma_q: requires s > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  return x < s + 1.0 ? 1.0 - gamma_p_series(s, x) : gamma_q_cf(s, x);
}

double chi_squared_sf(double x, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chi_squared_sf: df must be > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) {
  const double p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  return p > 1.0 ? 1.0 : p;
}

}  // namespace spellkit
