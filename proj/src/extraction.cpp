#include "spellkit/extraction.hpp"

#include <algorithm>
#include <stdexcept>

namespace spellkit {

namespace {

constexpr int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  return m == 2 && is_leap(y) ? 29 : kDaysInMonth[m - 1];
}

}  // namespace

bool valid_date(const Date& date) {
  if (date.m < 1 || date.m > 12) return false;
  if (date.d < 1 || date.d > days_in_month(date.y, date.m)) return false;
  return true;
}

long to_serial(const Date& date) {
  // Howard Hinnant's days_from_civil.
  const int y = date.y - (date.m <= 2);
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(date.m + (date.m > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(date.d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

Date from_serial(long serial) {
  long z = serial + 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date RainfallSeries::date_at(std::size_t index) const {
  return from_serial(to_serial(start) + static_cast<long>(index));
}

Date RainyIndicator::date_at(std::size_t index) const {
  return from_serial(to_serial(start) + static_cast<long>(index));
}

RainyIndicator mark_rainy(const RainfallSeries& series, double h_star) {
  if (!(h_star > 0.0)) throw std::invalid_argument("mark_rainy: threshold must be > 0");
  if (series.depth_mm.empty()) throw std::invalid_argument("mark_rainy: empty series");
  RainyIndicator ind;
  ind.start = series.start;
  ind.threshold = h_star;
  ind.days.resize(series.depth_mm.size());
  for (std::size_t i = 0; i < series.depth_mm.size(); ++i) {
    const auto& d = series.depth_mm[i];
    ind.days[i] = !d.has_value() ? DayState::missing
                  : *d >= h_star ? DayState::rainy
                                 : DayState::dry;
  }
  return ind;
}

SeasonSpec SeasonSpec::year() {
  SeasonSpec s;
  s.name = "year";
  s.months.fill(true);
  return s;
}

SeasonSpec SeasonSpec::s1() {
  SeasonSpec s;
  s.name = "s1";
  for (int m = 4; m <= 9; ++m) s.months[static_cast<std::size_t>(m) - 1] = true;
  return s;
}

SeasonSpec SeasonSpec::s2() {
  SeasonSpec s;
  s.name = "s2";
  for (int m : {10, 11, 12, 1, 2, 3}) s.months[static_cast<std::size_t>(m) - 1] = true;
  return s;
}

namespace {

struct Run {
  DayState state;
  int start;
  int len;
  bool at_stretch_start;  // preceded by record boundary or missing day
  bool at_stretch_end;
};

// Maximal runs of equal state within contiguous (no-missing) stretches.
std::vector<Run> state_runs(const RainyIndicator& ind) {
  std::vector<Run> runs;
  const int n = static_cast<int>(ind.days.size());
  int i = 0;
  while (i < n) {
    if (ind.days[static_cast<std::size_t>(i)] == DayState::missing) {
      ++i;
      continue;
    }
    const DayState s = ind.days[static_cast<std::size_t>(i)];
    int j = i;
    while (j < n && ind.days[static_cast<std::size_t>(j)] == s) ++j;
    Run r;
    r.state = s;
    r.start = i;
    r.len = j - i;
    r.at_stretch_start =
        i == 0 || ind.days[static_cast<std::size_t>(i) - 1] == DayState::missing;
    r.at_stretch_end =
        j == n || ind.days[static_cast<std::size_t>(j)] == DayState::missing;
    runs.push_back(r);
    i = j;
  }
  return runs;
}

}  // namespace

EventExtraction extract_events(const RainyIndicator& ind) {
  if (ind.days.empty()) throw std::invalid_argument("extract_events: empty indicator");

  EventExtraction out;

  // Inter-arrival times: consecutive rainy days not separated by missing.
  {
    int last_rainy = -1;
    bool gap_since = false;
    for (int i = 0; i < static_cast<int>(ind.days.size()); ++i) {
      switch (ind.days[static_cast<std::size_t>(i)]) {
        case DayState::missing:
          gap_since = true;
          break;
        case DayState::rainy:
          if (last_rainy >= 0 && !gap_since)
            out.it.push_back(Event{i - last_rainy, last_rainy, i, false});
          last_rainy = i;
          gap_since = false;
          break;
        case DayState::dry:
          break;
      }
    }
  }

  const std::vector<Run> runs = state_runs(ind);

  // Wet spells: every rainy run; censored when it touches a stretch edge.
  // Dry spells: dry runs bracketed by rainy days on both sides (these are
  // exactly it - 1 for it > 1); edge-adjacent dry runs are never counted.
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    if (run.state == DayState::rainy) {
      out.ws.push_back(Event{run.len, run.start, run.start + run.len - 1,
                             run.at_stretch_start || run.at_stretch_end});
    } else {
      if (!run.at_stretch_start && !run.at_stretch_end)
        out.ds.push_back(Event{run.len, run.start, run.start + run.len - 1, false});
    }
  }

  // Chains. Within each stretch the runs alternate, so a wet chain joins
  // consecutive rainy runs while the dry run between them has length 1
  // and is interior; it ends normally at an interior dry run longer than
  // one day, and is censored when the stretch ends first.
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].state != DayState::rainy) continue;
    if (r > 0 && runs[r - 1].state == DayState::dry && runs[r - 1].len == 1 &&
        !runs[r - 1].at_stretch_start && !runs[r - 1].at_stretch_end)
      continue;  // joined to the previous chain

    int length = 0;
    // Ambiguous start: the first spell is truncated, or a 1-day dry run
    // at the stretch edge could have joined it to an unobserved chain.
    bool censored = runs[r].at_stretch_start ||
                    (r > 0 && runs[r - 1].state == DayState::dry &&
                     runs[r - 1].len == 1 && runs[r - 1].at_stretch_start);
    std::size_t k = r;
    const int start = runs[r].start;
    int end = runs[r].start + runs[r].len - 1;
    while (true) {
      length += runs[k].len;
      end = runs[k].start + runs[k].len - 1;
      if (runs[k].at_stretch_end) {
        censored = true;  // last spell truncated by the boundary
        break;
      }
      const Run& sep = runs[k + 1];  // dry run following this rainy run
      if (sep.len > 1) break;        // a >1-day dry gap: definitive termination
      if (sep.at_stretch_end) {
        censored = true;  // 1-day dry at the boundary: continuation unknown
        break;
      }
      k += 2;
    }
    out.wch.push_back(Event{length, start, end, censored});
  }

  // Dry chains: symmetric over counted dry runs, joined across 1-day
  // rainy runs. The chain is censored when the rainy run after its last
  // dry spell has length 1 but no counted dry spell follows.
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].state != DayState::dry) continue;
    if (runs[r].at_stretch_start || runs[r].at_stretch_end) continue;  // not a ds
    if (r >= 2 && runs[r - 1].state == DayState::rainy && runs[r - 1].len == 1 &&
        runs[r - 2].state == DayState::dry && !runs[r - 2].at_stretch_start &&
        !runs[r - 2].at_stretch_end)
      continue;  // joined to the previous chain

    int length = 0;
    // Ambiguous start: a 1-day rainy run at the stretch edge could have
    // joined this chain to unobserved dry days before the gap.
    bool censored = r > 0 && runs[r - 1].state == DayState::rainy &&
                    runs[r - 1].len == 1 && runs[r - 1].at_stretch_start;
    std::size_t k = r;
    const int start = runs[r].start;
    int end = runs[r].start + runs[r].len - 1;
    while (true) {
      length += runs[k].len;
      end = runs[k].start + runs[k].len - 1;
      const Run& sep = runs[k + 1];  // rainy run following (ds is bracketed)
      if (sep.len > 1) break;        // a >1-day wet spell: definitive termination
      // 1-day rainy separator; the chain continues only into a counted ds
      if (k + 2 >= runs.size() || runs[k + 2].state != DayState::dry ||
          runs[k + 2].at_stretch_end || runs[k + 2].at_stretch_start) {
        censored = true;  // chain runs into the boundary through the 1-day spell
        break;
      }
      k += 2;
    }
    out.dch.push_back(Event{length, start, end, censored});
  }

  return out;
}

namespace {

SpellSample to_sample(Variable var, const std::vector<Event>& events,
                      CensoredPolicy policy) {
  SpellSample s;
  s.variable = var;
  for (const Event& e : events)
    if (policy == CensoredPolicy::include || !e.censored) s.values.push_back(e.value);
  return s;
}

SpellSample to_sample_in_season(Variable var, const std::vector<Event>& events,
                                const RainyIndicator& ind, const SeasonSpec& season,
                                const ExtractionConfig& cfg) {
  SpellSample s;
  s.variable = var;
  s.period = season.name;
  const long base = to_serial(ind.start);
  for (const Event& e : events) {
    if (cfg.censored == CensoredPolicy::exclude && e.censored) continue;
    const int day = cfg.assignment == SeasonRule::by_start_day ? e.start : e.end;
    const Date d = from_serial(base + day);
    if (season.contains_month(d.m)) s.values.push_back(e.value);
  }
  return s;
}

}  // namespace

SpellSample extract_it(const RainyIndicator& ind) {
  const EventExtraction ev = extract_events(ind);
  return to_sample(Variable::it, ev.it, CensoredPolicy::include);
}

Spells derive_spells(const RainyIndicator& ind, CensoredPolicy policy) {
  const EventExtraction ev = extract_events(ind);
  Spells out;
  out.ws = to_sample(Variable::ws, ev.ws, policy);
  out.ds = to_sample(Variable::ds, ev.ds, policy);
  return out;
}

Chains derive_chains(const RainyIndicator& ind, CensoredPolicy policy) {
  const EventExtraction ev = extract_events(ind);
  Chains out;
  out.wch = to_sample(Variable::wch, ev.wch, policy);
  out.dch = to_sample(Variable::dch, ev.dch, policy);
  return out;
}

Extraction extract_all(const RainyIndicator& ind, const SeasonSpec& season,
                       const ExtractionConfig& cfg) {
  const EventExtraction ev = extract_events(ind);
  Extraction out;
  out.it = to_sample_in_season(Variable::it, ev.it, ind, season, cfg);
  out.ws = to_sample_in_season(Variable::ws, ev.ws, ind, season, cfg);
  out.ds = to_sample_in_season(Variable::ds, ev.ds, ind, season, cfg);
  out.wch = to_sample_in_season(Variable::wch, ev.wch, ind, season, cfg);
  out.dch = to_sample_in_season(Variable::dch, ev.dch, ind, season, cfg);
  return out;
}

SeasonSplit split_seasons(const RainyIndicator& ind, const ExtractionConfig& cfg) {
  SeasonSplit out;
  out.year = extract_all(ind, SeasonSpec::year(), cfg);
  out.s1 = extract_all(ind, SeasonSpec::s1(), cfg);
  out.s2 = extract_all(ind, SeasonSpec::s2(), cfg);
  return out;
}

}  // namespace spellkit
