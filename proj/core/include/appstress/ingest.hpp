#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "appstress/timeutil.hpp"

namespace appstress {

/// One usage interval of one app. `app_id` is stored lowercase.
struct AppEvent {
  std::string user_id;
  std::string app_id;
  Timestamp start = 0;
  Timestamp end = 0;

  Timestamp duration() const noexcept { return end - start; }
  friend bool operator==(const AppEvent&, const AppEvent&) = default;
};

/// Half-open [start, end) window during which the screen was on.
struct ScreenInterval {
  std::string user_id;
  Timestamp start = 0;
  Timestamp end = 0;

  friend bool operator==(const ScreenInterval&, const ScreenInterval&) = default;
};

/// One self-reported stress answer on the 1..5 scale.
struct EmaResponse {
  std::string user_id;
  Timestamp at = 0;
  int level = 0;

  friend bool operator==(const EmaResponse&, const EmaResponse&) = default;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string reason;
};

/// Rows that parsed cleanly plus one diagnostic per rejected row.
/// `rows.size() + diagnostics.size() == data_rows` always holds.
template <typename Row>
struct Parsed {
  std::vector<Row> rows;
  std::vector<Diagnostic> diagnostics;
  std::size_t data_rows = 0;
};

enum class InputFormat { Csv, Jsonl };

/// `.jsonl`/`.ndjson` map to Jsonl, anything else to Csv.
InputFormat format_from_path(const std::filesystem::path& path);

// Parsers raise ErrorKind::Io for unreadable streams and ErrorKind::Schema
// for a CSV header lacking a required column. Row-level problems become
// diagnostics.
Parsed<AppEvent> parse_app_events(std::istream& in, InputFormat format);
Parsed<ScreenInterval> parse_screen_intervals(std::istream& in, InputFormat format);
Parsed<EmaResponse> parse_ema(std::istream& in, InputFormat format);

/// Sorts by (user, start) and merges overlapping or abutting intervals.
/// Empty intervals cover no time and are dropped.
std::vector<ScreenInterval> normalize_screen_intervals(std::vector<ScreenInterval> raw);

/// Intersects each event with the user's screen-on intervals; one output
/// event per non-empty intersection, in input event order. `screen` must be
/// normalized.
std::vector<AppEvent> clip_to_screen_on(std::span<const AppEvent> events,
                                        std::span<const ScreenInterval> screen);

struct WorkHoursFilter {
  bool enabled = false;
  int weekday_start = 9 * 3600;  // seconds after local midnight
  int weekday_end = 18 * 3600;
  std::string timezone = "UTC";

  /// Raises a config error for an unknown zone or an empty window.
  void validate() const;
};

/// Identity when disabled; otherwise keeps only the parts of each event that
/// fall in [weekday_start, weekday_end) local time, Monday to Friday.
std::vector<AppEvent> apply_work_filter(std::span<const AppEvent> events, const WorkHoursFilter& filter);

/// One `line:<n> <reason>` per diagnostic; `context` (e.g. a file name) is
/// prepended to the reason when non-empty.
void write_diagnostics(std::ostream& out, std::span<const Diagnostic> diagnostics,
                       std::string_view context = {});

void write_app_events_csv(std::ostream& out, std::span<const AppEvent> events);
void write_screen_csv(std::ostream& out, std::span<const ScreenInterval> intervals);
void write_ema_csv(std::ostream& out, std::span<const EmaResponse> responses);

}  // namespace appstress
