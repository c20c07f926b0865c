#include "spellkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spellkit/errors.hpp"

namespace spellkit {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

Date parse_date(const std::string& text, long line) {
  // strict YYYY-MM-DD
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw ParseError("expected ISO date YYYY-MM-DD, got '" + text + "'", line);
  const auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = text.data() + pos;
    const auto [p, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc() || p != first + len)
      throw ParseError("malformed date '" + text + "'", line);
    return v;
  };
  const Date d{num(0, 4), num(5, 2), num(8, 2)};
  if (!valid_date(d)) throw ParseError("invalid calendar date '" + text + "'", line);
  return d;
}

std::optional<double> parse_depth(const std::string& text, long line) {
  if (text.empty() || text == "NA") return std::nullopt;
  double v = 0.0;
  const char* first = text.data();
  const auto [p, ec] = std::from_chars(first, first + text.size(), v);
  if (ec != std::errc() || p != first + text.size())
    throw ParseError("malformed depth '" + text + "'", line);
  if (!(v >= 0.0)) throw ParseError("negative rainfall depth '" + text + "'", line);
  return v;
}

}  // namespace

ParsedSeries parse_series(std::istream& in, const std::string& origin) {
  std::string row;
  long line = 0;

  if (!std::getline(in, row)) throw ParseError(origin + ": empty file", 0);
  ++line;
  const std::string header = strip(row);
  if (header != "date,depth_mm")
    throw ParseError(origin + ": expected header 'date,depth_mm'", line);

  ParsedSeries out;
  bool first = true;
  long prev_serial = 0;

  while (std::getline(in, row)) {
    ++line;
    const std::string trimmed = strip(row);
    if (trimmed.empty()) continue;
    const std::size_t comma = trimmed.find(',');
    if (comma == std::string::npos)
      throw ParseError("expected 'date,depth_mm' row", line);
    const Date date = parse_date(strip(trimmed.substr(0, comma)), line);
    const std::optional<double> depth =
        parse_depth(strip(trimmed.substr(comma + 1)), line);
    const long serial = to_serial(date);

    if (first) {
      out.series.start = date;
      out.series.depth_mm.push_back(depth);
      prev_serial = serial;
      first = false;
      continue;
    }
    if (serial <= prev_serial)
      throw ParseError("dates must be strictly increasing", line);
    for (long gap = prev_serial + 1; gap < serial; ++gap) {
      out.series.depth_mm.push_back(std::nullopt);
      ++out.gap_days_inserted;
    }
    out.series.depth_mm.push_back(depth);
    prev_serial = serial;
  }

  if (out.series.depth_mm.empty()) throw ParseError(origin + ": no data rows", line);
  if (out.gap_days_inserted > 0)
    out.warnings.push_back(std::to_string(out.gap_days_inserted) +
                           " missing day(s) inserted for date gaps");
  return out;
}

ParsedSeries parse_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path.string());
  return parse_series(in, path.string());
}

void write_series(const RainfallSeries& series, std::ostream& out) {
  out << "date,depth_mm\n";
  const long base = to_serial(series.start);
  for (std::size_t i = 0; i < series.depth_mm.size(); ++i) {
    const Date d = from_serial(base + static_cast<long>(i));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.y, d.m, d.d);
    out << buf << ',';
    if (series.depth_mm[i].has_value()) {
      std::ostringstream v;
      v << *series.depth_mm[i];
      out << v.str();
    } else {
      out << "NA";
    }
    out << '\n';
  }
}

void write_series(const RainfallSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path.string());
  write_series(series, out);
}

}  // namespace spellkit
