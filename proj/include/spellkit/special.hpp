#pragma once

namespace spellkit {

/// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.
double gamma_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double gamma_q(double s, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_squared_sf(double x, double df);

/// Standard normal upper tail P(Z > z).
double normal_sf(double z);

/// Two-sided normal p-value, 2 * P(Z > |z|).
double normal_two_sided_p(double z);

}  // namespace spellkit
