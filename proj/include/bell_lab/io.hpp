#pragma once

// Integer CSV formats for event streams, paired trials, spreadsheets, ball
// lists and game rounds. Every file starts with a fixed header line.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bell_lab/bellgame.hpp"
#include "bell_lab/core.hpp"
#include "bell_lab/sources.hpp"
#include "bell_lab/stats.hpp"

namespace bell_lab::io {

inline constexpr std::string_view kEventsHeader = "window_index,setting_label,outcome";
inline constexpr std::string_view kTrialsHeader = "setting_a,setting_b,a,b";
inline constexpr std::string_view kSpreadsheetHeader = "A,Ap,B,Bp";
inline constexpr std::string_view kBallsHeader = "A0,A3,B0,B2,prepared";
inline constexpr std::string_view kRoundsHeader = "minute,i,j,x,y,a,b,point";

/// Malformed file content (as opposed to a file that cannot be opened).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<long long> split_ints(const std::string& line, std::size_t expected, std::size_t line_no) {
  std::vector<long long> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(cell, &used));
      while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line_no) + ": not an integer: '" + cell + "'");
    }
  }
  if (out.size() != expected) {
    throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) + " columns");
  }
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// Calls row(values, line_no) for each data line after checking the header.
template <class Row>
void read_rows(std::istream& in, std::string_view header, std::size_t columns, Row&& row) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != header) {
    throw FormatError("expected header '" + std::string(header) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    row(split_ints(line, columns, line_no), line_no);
  }
}

inline Outcome outcome_at(long long v, std::size_t line_no) {
  if (v < -1 || v > 1) throw FormatError("line " + std::to_string(line_no) + ": outcome must be -1, 0 or 1");
  return Outcome::from_int(static_cast<int>(v));
}

inline int bit_at(long long v, std::size_t line_no) {
  if (v != 0 && v != 1) throw FormatError("line " + std::to_string(line_no) + ": expected a 0/1 bit");
  return static_cast<int>(v);
}

inline int pm_at(long long v, std::size_t line_no) {
  if (v != 1 && v != -1) throw FormatError("line " + std::to_string(line_no) + ": expected +1 or -1");
  return static_cast<int>(v);
}

}  // namespace detail

inline void write_events(std::ostream& out, const std::vector<StationEvent>& events) {
  out << kEventsHeader << '\n';
  for (const auto& e : events) out << e.window_index << ',' << e.setting_label << ',' << e.outcome.value() << '\n';
}

inline std::vector<StationEvent> read_events(std::istream& in) {
  std::vector<StationEvent> events;
  detail::read_rows(in, kEventsHeader, 3, [&](const std::vector<long long>& v, std::size_t line_no) {
    if (v[0] < 0) throw FormatError("line " + std::to_string(line_no) + ": window_index must be >= 0");
    events.push_back(StationEvent{static_cast<std::uint64_t>(v[0]), static_cast<int>(v[1]),
                                  detail::outcome_at(v[2], line_no)});
  });
  return events;
}

inline void write_trials(std::ostream& out, const std::vector<PairedTrial>& trials) {
  out << kTrialsHeader << '\n';
  for (const auto& t : trials) {
    out << t.setting_a << ',' << t.setting_b << ',' << t.a.value() << ',' << t.b.value() << '\n';
  }
}

inline std::vector<PairedTrial> read_trials(std::istream& in) {
  std::vector<PairedTrial> trials;
  detail::read_rows(in, kTrialsHeader, 4, [&](const std::vector<long long>& v, std::size_t line_no) {
    trials.push_back(PairedTrial{static_cast<int>(v[0]), static_cast<int>(v[1]), detail::outcome_at(v[2], line_no),
                                 detail::outcome_at(v[3], line_no)});
  });
  return trials;
}

inline void write_spreadsheet(std::ostream& out, const Spreadsheet4& sheet) {
  out << kSpreadsheetHeader << '\n';
  for (const auto& r : sheet.rows) out << r.a << ',' << r.a_prime << ',' << r.b << ',' << r.b_prime << '\n';
}

inline Spreadsheet4 read_spreadsheet(std::istream& in) {
  Spreadsheet4 sheet;
  detail::read_rows(in, kSpreadsheetHeader, 4, [&](const std::vector<long long>& v, std::size_t line_no) {
    sheet.rows.push_back(SpreadsheetRow{detail::pm_at(v[0], line_no), detail::pm_at(v[1], line_no),
                                        detail::pm_at(v[2], line_no), detail::pm_at(v[3], line_no)});
  });
  return sheet;
}

inline void write_balls(std::ostream& out, const std::vector<BallPair>& balls) {
  out << kBallsHeader << '\n';
  for (const auto& p : balls) {
    out << p.a0 << ',' << p.a3 << ',' << p.b0 << ',' << p.b2 << ',' << (p.prepared ? 1 : 0) << '\n';
  }
}

inline std::vector<BallPair> read_balls(std::istream& in) {
  std::vector<BallPair> balls;
  detail::read_rows(in, kBallsHeader, 5, [&](const std::vector<long long>& v, std::size_t line_no) {
    balls.push_back(BallPair{detail::bit_at(v[0], line_no), detail::bit_at(v[1], line_no),
                             detail::bit_at(v[2], line_no), detail::bit_at(v[3], line_no),
                             detail::bit_at(v[4], line_no) == 1});
  });
  return balls;
}

/// Minutes are numbered from 1.
inline void write_rounds(std::ostream& out, const std::vector<Round>& rounds) {
  out << kRoundsHeader << '\n';
  std::size_t minute = 1;
  for (const auto& r : rounds) {
    out << minute++ << ',' << r.i << ',' << r.j << ',' << r.x << ',' << r.y << ',' << r.a << ',' << r.b << ','
        << r.point << '\n';
  }
}

/// First line of a file, used to tell events and trials apart.
inline std::string peek_header(std::istream& in) {
  const auto pos = in.tellg();
  std::string line;
  std::getline(in, line);
  in.clear();
  in.seekg(pos);
  return detail::strip_cr(line);
}

// ---------------------------------------------------------------------------
// Drifting-device spec files
// ---------------------------------------------------------------------------
//
//   # comment
//   n_symbols = 6
//   symbol_values = 2, 1, 0.5, 0, -0.5, -2
//   runs = 100
//   run_len = 100000
//   regime = 1-100: p1, p2, p3, p4, p5, p6
//   regime = 25-25: 0, 0, 0, 0.25, 0, 0.75
//
// Run ranges are one-based and inclusive; later regimes override earlier
// ones where they overlap.

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_doubles(const std::string& text, std::size_t line_no) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

inline std::size_t parse_count(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line_no) + ": expected a non-negative integer: '" + text + "'");
  }
}

}  // namespace detail

inline DriftingDeviceSpec read_drifting_spec(std::istream& in) {
  DriftingDeviceSpec spec;
  spec.regimes.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "n_symbols") {
      spec.n_symbols = detail::parse_count(value, line_no);
    } else if (key == "symbol_values") {
      spec.symbol_values = detail::parse_doubles(value, line_no);
    } else if (key == "runs") {
      spec.runs = detail::parse_count(value, line_no);
    } else if (key == "run_len") {
      spec.run_len = detail::parse_count(value, line_no);
    } else if (key == "regime") {
      const auto colon = value.find(':');
      const auto dash = value.find('-');
      if (colon == std::string::npos || dash == std::string::npos || dash > colon) {
        throw FormatError("line " + std::to_string(line_no) + ": regime must read 'first-last: p1, p2, ...'");
      }
      const std::size_t first = detail::parse_count(detail::trim(value.substr(0, dash)), line_no);
      const std::size_t last = detail::parse_count(detail::trim(value.substr(dash + 1, colon - dash - 1)), line_no);
      if (first == 0 || last < first) throw FormatError("line " + std::to_string(line_no) + ": bad run range");
      spec.regimes.push_back(Regime{first - 1, last - 1, detail::parse_doubles(value.substr(colon + 1), line_no)});
    } else {
      throw FormatError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return spec;
}

inline void write_drifting_spec(std::ostream& out, const DriftingDeviceSpec& spec) {
  auto list = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  };
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "n_symbols = " << spec.n_symbols << '\n' << "symbol_values = ";
  list(spec.symbol_values);
  out << '\n' << "runs = " << spec.runs << '\n' << "run_len = " << spec.run_len << '\n';
  for (const auto& r : spec.regimes) {
    out << "regime = " << r.first_run + 1 << '-' << r.last_run + 1 << ": ";
    list(r.probabilities);
    out << '\n';
  }
}

}  // namespace bell_lab::io
