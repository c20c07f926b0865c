#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace spellkit {

/// The five rainfall time variables.
enum class Variable { it, ws, ds, wch, dch };

const char* variable_name(Variable v);
Variable variable_from_name(std::string_view name);

/// A sequence of positive integer durations for one time variable, in
/// chronological (extraction) order, with its provenance labels.
struct SpellSample {
  Variable variable = Variable::it;
  std::vector<int> values;
  std::string period = "year";
  std::string station;

  std::size_t n() const { return values.size(); }

  double mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  }
};

}  // namespace spellkit
