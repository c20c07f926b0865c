#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spellkit/extraction.hpp"

namespace spellkit {

struct ParsedSeries {
  RainfallSeries series;
  long gap_days_inserted = 0;  // synthetic missing days for date gaps
  std::vector<std::string> warnings;
};

/// Reads a `date,depth_mm` CSV (header required, ISO-8601 dates, missing
/// depth as an empty field or NA). Gaps in the date grid are filled with
/// missing days; non-monotone dates or malformed rows raise ParseError
/// with the line number.
ParsedSeries parse_series(const std::filesystem::path& path);
ParsedSeries parse_series(std::istream& in, const std::string& origin = "<stream>");

/// Inverse of parse_series on the in-memory representation: one row per
/// day, missing days written as NA.
void write_series(const RainfallSeries& series, std::ostream& out);
void write_series(const RainfallSeries& series, const std::filesystem::path& path);

}  // namespace spellkit
