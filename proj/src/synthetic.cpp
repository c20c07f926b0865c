#include "spellkit/synthetic.hpp"

#include <cmath>

#include "spellkit/rng.hpp"

namespace spellkit {

RainfallSeries synthetic_series(const SyntheticSpec& spec) {
  const LerchDist wet(spec.wet_law);
  const LerchDist dry(spec.dry_law);
  RngStream spells(spec.seed, 0xa11e201fULL);
  RngStream depths(spec.seed, 0xdeb7a9c4ULL);

  RainfallSeries s;
  s.start = spec.start;
  s.depth_mm.reserve(static_cast<std::size_t>(spec.days));

  bool wet_phase = spells.uniform() < 0.5;
  while (static_cast<int>(s.depth_mm.size()) < spec.days) {
    const int len = wet_phase ? wet.sample(spells, 1)[0] : dry.sample(spells, 1)[0];
    for (int i = 0; i < len && static_cast<int>(s.depth_mm.size()) < spec.days; ++i) {
      if (wet_phase) {
        // depth >= 1 mm so the conventional threshold marks every wet day
        const double depth =
            1.0 - spec.depth_scale_mm * std::log(1.0 - depths.uniform());
        s.depth_mm.push_back(std::round(depth * 10.0) / 10.0);
      } else {
        s.depth_mm.push_back(0.0);
      }
    }
    wet_phase = !wet_phase;
  }
  return s;
}

}  // namespace spellkit
