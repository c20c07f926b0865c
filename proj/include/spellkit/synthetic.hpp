#pragma once

#include <cstdint>

#include "spellkit/extraction.hpp"
#include "spellkit/lerch.hpp"

namespace spellkit {

/// Configuration for the bundled synthetic station: an alternating
/// renewal process with wet-spell and dry-spell lengths drawn from the
/// given laws. Rainy-day depths are drawn above the threshold so a 1 mm
/// cut reproduces the generating indicator exactly.
struct SyntheticSpec {
  LerchParams wet_law = LerchParams::geometric(0.45);
  LerchParams dry_law = LerchParams::polylog(0.88, 0.9);
  Date start{1950, 1, 1};
  int days = 25567;  // about 70 years
  double depth_scale_mm = 5.0;
  std::uint64_t seed = 42;
};

RainfallSeries synthetic_series(const SyntheticSpec& spec = {});

}  // namespace spellkit
