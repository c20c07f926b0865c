#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spellkit/lerch.hpp"
#include "spellkit/types.hpp"

namespace spellkit {

struct SampleMoments {
  double mean = 0.0;
  double mean_log_shifted = 0.0;  // mean of ln(a + v), at the fitted a
  double mean_inv_shifted = 0.0;  // mean of 1/(a + v), at the fitted a
};

struct FittedModel {
  Family family = Family::geometric;
  LerchParams params;
  double loglik = 0.0;
  std::size_t n = 0;
  bool converged = false;
  bool boundary = false;  // degenerate optimum on the theta -> 0 edge
  double grad_norm = 0.0; // max-norm of the mean-loglik gradient, transformed space
  SampleMoments sample_moments;
  /// Standard errors for {theta, s, a} from the observed information
  /// matrix; entries only for the family's free parameters.
  std::array<std::optional<double>, 3> std_errors;
  std::vector<std::string> warnings;
};

struct FitOptions {
  bool s_nonneg = true;   // constrain s >= 0 (log transform); false = free s
  int starts = 5;         // moment-based start plus jittered variants
  std::uint64_t seed = 0x5f3c9d2eULL;  // start jitter is seed-derived
};

/// Sum of ln pmf(v_i) computed from sufficient statistics:
/// sum_i [(v_i - 1) ln theta - s ln(v_i + a)] - N ln Phi(theta, s, a+1).
double log_likelihood(const LerchParams& params, const SpellSample& sample);

/// Maximum-likelihood fit of one family. Requires n >= 10. The optimizer
/// is a BFGS quasi-Newton on transformed coordinates (logit theta,
/// log s or identity, log(1+a)) with numerically differenced gradients
/// and multi-start. The geometric family uses its closed form.
FittedModel fit_mle(const SpellSample& sample, Family family,
                    const FitOptions& options = {});

struct LlrResult {
  double d = 0.0;  // -2 (loglik_null - loglik_alt)
  int df = 0;
  double p = 1.0;
};

/// Likelihood-ratio test of a nested pair fitted on the same sample.
/// Throws InconsistentFitsError when d < -1e-6.
LlrResult llr_test(const FittedModel& null_fit, const FittedModel& alt_fit);

struct SelectionEntry {
  Family family;
  std::optional<FittedModel> fit;
  std::optional<LlrResult> vs_full;  // against the 3-parameter model
  bool rejected = false;
  std::string decision;
  std::string error;
};

struct SelectionTrace {
  std::vector<SelectionEntry> entries;
  Family chosen = Family::lerch3;
};

struct SelectionResult {
  FittedModel model;
  SelectionTrace trace;
};

/// Fits all five families, tests each sub-family against the full
/// 3-parameter model, and among the candidates not rejected at level
/// alpha returns the one with the fewest free parameters (ties broken
/// by log-likelihood). Falls back to the full model when every
/// sub-family is rejected.
SelectionResult select_model(const SpellSample& sample, double alpha = 0.05,
                             const FitOptions& options = {});

}  // namespace spellkit
