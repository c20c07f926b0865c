#pragma once

#include <optional>
#include <vector>

#include "spellkit/inference.hpp"
#include "spellkit/lerch.hpp"
#include "spellkit/rng.hpp"
#include "spellkit/types.hpp"

namespace spellkit {

/// Real-valued counts per integer value 1..max_value; real so that
/// smoothing can spread an integer count across several values.
struct FrequencyTable {
  std::vector<double> counts;  // counts[k-1] = frequency of value k

  static FrequencyTable from_values(const std::vector<int>& values);
  double total() const;
  int max_value() const { return static_cast<int>(counts.size()); }
};

/// Contiguous binning of {1, 2, ...}: class i covers (upper[i-1], upper[i]],
/// the first class starts at 1, and an open tail class (> upper.back())
/// is always present.
struct Classes {
  std::vector<int> upper;

  static Classes per_integer(int max_value);

  /// Default test binning: one class per integer out to the point where
  /// the expected tail count n * P(X > k) drops below one, plus the open
  /// tail. Depends only on the model and the sample size, never on the
  /// realized sample, which keeps the simulated test exact.
  static Classes for_model(const PmfTable& model, std::size_t n);

  int count() const { return static_cast<int>(upper.size()) + 1; }
  int index_of(int value) const;  // tail class for value > upper.back()
};

/// Spreads isolated high values (count <= max_outlier_count) preceded by
/// at least gap_threshold zero-count values uniformly over the gap,
/// processing from the largest value down. Total mass is preserved.
FrequencyTable smooth_outliers(const FrequencyTable& table, int gap_threshold = 5,
                               double max_outlier_count = 2.0);

/// Pearson statistic over the declared classes with expected counts
/// N * P(class) from the model. A class with zero expectation and zero
/// observation contributes 0; zero expectation with a positive
/// observation yields +infinity.
double chi2_statistic(const FrequencyTable& observed, const PmfTable& model,
                      const Classes& classes);

struct GofOptions {
  int replicates = 3000;
  bool smooth = false;          // smooth observed frequencies before chi2_ref
  int gap_threshold = 5;
  std::optional<Classes> classes;  // default: Classes::for_model(model, n)
  /// When set, each replicate is refitted to this family before its
  /// statistic is computed (full parametric bootstrap). Default follows
  /// the fixed-model procedure.
  std::optional<Family> refit_family;
  FitOptions fit_options;
};

struct GofResult {
  double chi2_ref = 0.0;
  std::vector<double> replicate_stats;
  double p_value = 1.0;  // #{chi2_j > chi2_ref} / replicates, exactly
  Classes classes;
  bool smoothed = false;
};

/// Monte-Carlo goodness-of-fit: draws `replicates` samples of the same
/// size from the model (never refitted by default), computes every
/// replicate's statistic with the same classes and the same model as the
/// observed one, and reports the fraction of replicate statistics
/// exceeding it. The default binning comes from Classes::for_model, so
/// reference and replicate statistics are identically distributed under
/// the null and the simulated p-value is calibrated. Replicate r uses
/// rng.substream(r), so the result is independent of thread count. The
/// plain version runs the replicate loop in parallel; the _serial
/// variant is the reference implementation.
GofResult mc_gof(const std::vector<int>& values, const PmfTable& model,
                 const RngStream& rng, const GofOptions& options = {});
GofResult mc_gof_serial(const std::vector<int>& values, const PmfTable& model,
                        const RngStream& rng, const GofOptions& options = {});

}  // namespace spellkit
