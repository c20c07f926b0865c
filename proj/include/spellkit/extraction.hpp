#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spellkit/types.hpp"

namespace spellkit {

struct Date {
  int y = 1970;
  int m = 1;
  int d = 1;

  bool operator==(const Date&) const = default;
};

/// Days since 1970-01-01 (proleptic Gregorian).
long to_serial(const Date& date);
Date from_serial(long serial);
bool valid_date(const Date& date);

/// Daily rainfall depths on a contiguous day grid; a disengaged optional
/// marks a missing observation.
struct RainfallSeries {
  Date start;
  std::vector<std::optional<double>> depth_mm;

  std::size_t days() const { return depth_mm.size(); }
  Date date_at(std::size_t index) const;
};

enum class DayState : unsigned char { dry = 0, rainy = 1, missing = 2 };

struct RainyIndicator {
  Date start;
  double threshold = 1.0;
  std::vector<DayState> days;

  Date date_at(std::size_t index) const;
};

/// Day k is rainy when depth >= h_star (inclusive); missing stays missing.
RainyIndicator mark_rainy(const RainfallSeries& series, double h_star);

enum class SeasonRule { by_start_day, by_end_day };
enum class CensoredPolicy { include, exclude };

/// A set of calendar months; spells are assigned to the season containing
/// their assignment day and keep their full length.
struct SeasonSpec {
  std::string name = "year";
  std::array<bool, 12> months{};  // months[0] = January

  static SeasonSpec year();
  static SeasonSpec s1();  // April - September
  static SeasonSpec s2();  // October - March
  bool contains_month(int month) const { return months[static_cast<std::size_t>(month) - 1]; }
};

struct ExtractionConfig {
  double threshold = 1.0;
  SeasonRule assignment = SeasonRule::by_start_day;
  CensoredPolicy censored = CensoredPolicy::include;
};

/// One extracted duration with its location in the record. `censored`
/// marks spells/chains truncated by the record boundary or a missing-data
/// gap rather than terminated by an observed opposite-state day.
struct Event {
  int value = 0;
  int start = 0;  // day offset of the first member day (for it: earlier rainy day)
  int end = 0;    // day offset of the last member day (for it: later rainy day)
  bool censored = false;
};

struct EventExtraction {
  std::vector<Event> it, ws, ds, wch, dch;
};

/// Full run-structure pass over the indicator. Inter-arrival pairs
/// spanning a missing gap are dropped; dry spells require rainy days on
/// both sides; leading/trailing dry runs are never counted.
EventExtraction extract_events(const RainyIndicator& indicator);

/// Inter-arrival times: differences between consecutive rainy-day
/// positions within contiguous stretches.
SpellSample extract_it(const RainyIndicator& indicator);

struct Spells {
  SpellSample ws, ds;
};
Spells derive_spells(const RainyIndicator& indicator,
                     CensoredPolicy policy = CensoredPolicy::include);

struct Chains {
  SpellSample wch, dch;
};
/// Wet chains join wet spells separated by exactly 1-day dry spells and
/// count rainy days; dry chains are symmetric and count dry days.
Chains derive_chains(const RainyIndicator& indicator,
                     CensoredPolicy policy = CensoredPolicy::include);

struct Extraction {
  SpellSample it, ws, ds, wch, dch;
};

/// All five variables for one season. Each element is assigned by its
/// start day (or end day per config) and keeps its full length.
Extraction extract_all(const RainyIndicator& indicator, const SeasonSpec& season,
                       const ExtractionConfig& config = {});

struct SeasonSplit {
  Extraction year, s1, s2;
};
SeasonSplit split_seasons(const RainyIndicator& indicator,
                          const ExtractionConfig& config = {});

}  // namespace spellkit
