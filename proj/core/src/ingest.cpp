#include "appstress/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "ingest";

// A row's raw string fields, looked up by column name.
struct RawRow {
  std::size_t line = 0;
  std::map<std::string, std::string, std::less<>> fields;

  const std::string* get(std::string_view key) const {
    const auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  }
};

// Reads either format into RawRows, reporting structurally broken rows as
// diagnostics. `columns` are required in the CSV header.
template <typename Visit>
void read_rows(std::istream& in, InputFormat format, std::span<const std::string_view> columns,
               std::vector<Diagnostic>& diagnostics, std::size_t& data_rows, Visit&& visit) {
  if (format == InputFormat::Csv) {
    CsvReader reader(in, kModule);
    std::vector<std::size_t> index;
    for (const auto col : columns) index.push_back(reader.require_column(col));
    CsvRecord record;
    std::string error;
    while (reader.next(record, error)) {
      ++data_rows;
      if (!error.empty()) {
        diagnostics.push_back({record.line, error});
        continue;
      }
      RawRow row{record.line, {}};
      for (std::size_t c = 0; c < columns.size(); ++c) {
        row.fields.emplace(std::string(columns[c]), record.fields[index[c]]);
      }
      visit(row);
    }
    return;
  }

  LineReader reader(in, kModule);
  std::size_t line_number = 0;
  std::string line;
  while (reader.next(line_number, line)) {
    ++data_rows;
    if (!is_valid_utf8(line)) {
      diagnostics.push_back({line_number, "invalid UTF-8"});
      continue;
    }
    const auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      diagnostics.push_back({line_number, "not a JSON object"});
      continue;
    }
    RawRow row{line_number, {}};
    std::string missing;
    for (const auto col : columns) {
      const auto it = doc.find(col);
      if (it == doc.end() || it->is_null()) {
        missing = std::string(col);
        break;
      }
      if (it->is_string()) {
        row.fields.emplace(std::string(col), it->get<std::string>());
      } else if (it->is_number_integer()) {
        row.fields.emplace(std::string(col), std::to_string(it->get<std::int64_t>()));
      } else {
        row.fields.emplace(std::string(col), it->dump());
      }
    }
    if (!missing.empty()) {
      diagnostics.push_back({line_number, "missing field '" + missing + "'"});
      continue;
    }
    visit(row);
  }
  if (in.bad()) raise(ErrorKind::Io, kModule, "read failure");
}

std::optional<Timestamp> field_timestamp(const RawRow& row, std::string_view key, std::string& error) {
  const std::string* text = row.get(key);
  auto ts = text ? parse_timestamp(*text) : std::nullopt;
  if (!ts) error = "bad timestamp in " + std::string(key) + " '" + (text ? *text : "") + "'";
  return ts;
}

}  // namespace

InputFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = to_lower(path.extension().string());
  return (ext == ".jsonl" || ext == ".ndjson") ? InputFormat::Jsonl : InputFormat::Csv;
}

Parsed<AppEvent> parse_app_events(std::istream& in, InputFormat format) {
  static constexpr std::string_view columns[] = {"user_id", "app_id", "start_ts", "end_ts"};
  Parsed<AppEvent> out;
  read_rows(in, format, columns, out.diagnostics, out.data_rows, [&](const RawRow& row) {
    const std::string user = std::string(trim(*row.get("user_id")));
    const std::string app = to_lower(trim(*row.get("app_id")));
    if (user.empty()) return out.diagnostics.push_back({row.line, "empty user_id"});
    if (app.empty()) return out.diagnostics.push_back({row.line, "empty app_id"});
    std::string error;
    const auto start = field_timestamp(row, "start_ts", error);
    if (!start) return out.diagnostics.push_back({row.line, error});
    const auto end = field_timestamp(row, "end_ts", error);
    if (!end) return out.diagnostics.push_back({row.line, error});
    if (*end < *start) return out.diagnostics.push_back({row.line, "end_ts before start_ts"});
    out.rows.push_back({user, app, *start, *end});
  });
  return out;
}

Parsed<ScreenInterval> parse_screen_intervals(std::istream& in, InputFormat format) {
  static constexpr std::string_view columns[] = {"user_id", "start_ts", "end_ts"};
  Parsed<ScreenInterval> out;
  read_rows(in, format, columns, out.diagnostics, out.data_rows, [&](const RawRow& row) {
    const std::string user = std::string(trim(*row.get("user_id")));
    if (user.empty()) return out.diagnostics.push_back({row.line, "empty user_id"});
    std::string error;
    const auto start = field_timestamp(row, "start_ts", error);
    if (!start) return out.diagnostics.push_back({row.line, error});
    const auto end = field_timestamp(row, "end_ts", error);
    if (!end) return out.diagnostics.push_back({row.line, error});
    if (*end < *start) return out.diagnostics.push_back({row.line, "end_ts before start_ts"});
    out.rows.push_back({user, *start, *end});
  });
  return out;
}

Parsed<EmaResponse> parse_ema(std::istream& in, InputFormat format) {
  static constexpr std::string_view columns[] = {"user_id", "ts", "level"};
  Parsed<EmaResponse> out;
  read_rows(in, format, columns, out.diagnostics, out.data_rows, [&](const RawRow& row) {
    const std::string user = std::string(trim(*row.get("user_id")));
    if (user.empty()) return out.diagnostics.push_back({row.line, "empty user_id"});
    std::string error;
    const auto at = field_timestamp(row, "ts", error);
    if (!at) return out.diagnostics.push_back({row.line, error});
    const std::string_view text = trim(*row.get("level"));
    int level = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), level);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      return out.diagnostics.push_back({row.line, "level is not an integer '" + std::string(text) + "'"});
    }
    if (level < 1 || level > 5) {
      return out.diagnostics.push_back({row.line, "level " + std::to_string(level) + " outside 1..5"});
    }
    out.rows.push_back({user, *at, level});
  });
  return out;
}

std::vector<ScreenInterval> normalize_screen_intervals(std::vector<ScreenInterval> raw) {
  std::erase_if(raw, [](const ScreenInterval& s) { return s.end <= s.start; });
  std::sort(raw.begin(), raw.end(), [](const ScreenInterval& a, const ScreenInterval& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  });
  std::vector<ScreenInterval> merged;
  for (auto& s : raw) {
    if (!merged.empty() && merged.back().user_id == s.user_id && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(std::move(s));
    }
  }
  return merged;
}

std::vector<AppEvent> clip_to_screen_on(std::span<const AppEvent> events,
                                        std::span<const ScreenInterval> screen) {
  // Normalized input is grouped by user and sorted by start within a user.
  std::map<std::string_view, std::span<const ScreenInterval>> by_user;
  for (std::size_t i = 0; i < screen.size();) {
    std::size_t j = i;
    while (j < screen.size() && screen[j].user_id == screen[i].user_id) ++j;
    by_user.emplace(screen[i].user_id, screen.subspan(i, j - i));
    i = j;
  }

  std::vector<AppEvent> out;
  for (const auto& e : events) {
    const auto it = by_user.find(e.user_id);
    if (it == by_user.end()) continue;
    const auto intervals = it->second;
    // First interval whose end lies after the event start.
    auto s = std::upper_bound(intervals.begin(), intervals.end(), e.start,
                              [](Timestamp t, const ScreenInterval& iv) { return t < iv.end; });
    for (; s != intervals.end() && s->start < e.end; ++s) {
      const Timestamp lo = std::max(e.start, s->start);
      const Timestamp hi = std::min(e.end, s->end);
      if (lo < hi) out.push_back({e.user_id, e.app_id, lo, hi});
    }
  }
  return out;
}

void WorkHoursFilter::validate() const {
  if (!enabled) return;
  Zone zone(timezone);  // raises on unknown names
  if (weekday_start < 0 || weekday_end > 24 * 3600 || weekday_start >= weekday_end) {
    raise(ErrorKind::Config, kModule, "work hours require weekday_start < weekday_end within one day");
  }
}

std::vector<AppEvent> apply_work_filter(std::span<const AppEvent> events, const WorkHoursFilter& filter) {
  if (!filter.enabled) return {events.begin(), events.end()};
  filter.validate();
  const Zone zone(filter.timezone);
  std::vector<AppEvent> out;
  for (const auto& e : events) {
    if (e.end <= e.start) continue;
    const Date first = zone.local_day(e.start);
    const Date last = zone.local_day(e.end - 1);
    for (Date day = first; day <= last; ++day) {
      const absl::Weekday wd = absl::GetWeekday(day);
      if (wd == absl::Weekday::saturday || wd == absl::Weekday::sunday) continue;
      const Timestamp lo = std::max(e.start, zone.at_local(day, filter.weekday_start));
      const Timestamp hi = std::min(e.end, zone.at_local(day, filter.weekday_end));
      if (lo < hi) out.push_back({e.user_id, e.app_id, lo, hi});
    }
  }
  return out;
}

void write_diagnostics(std::ostream& out, std::span<const Diagnostic> diagnostics, std::string_view context) {
  for (const auto& d : diagnostics) {
    out << "line:" << d.line << ' ';
    if (!context.empty()) out << context << ": ";
    out << d.reason << '\n';
  }
}

void write_app_events_csv(std::ostream& out, std::span<const AppEvent> events) {
  out << "user_id,app_id,start_ts,end_ts\n";
  for (const auto& e : events) {
    out << csv_field(e.user_id) << ',' << csv_field(e.app_id) << ',' << format_timestamp(e.start) << ','
        << format_timestamp(e.end) << '\n';
  }
}

void write_screen_csv(std::ostream& out, std::span<const ScreenInterval> intervals) {
  out << "user_id,start_ts,end_ts\n";
  for (const auto& s : intervals) {
    out << csv_field(s.user_id) << ',' << format_timestamp(s.start) << ',' << format_timestamp(s.end) << '\n';
  }
}

void write_ema_csv(std::ostream& out, std::span<const EmaResponse> responses) {
  out << "user_id,ts,level\n";
  for (const auto& r : responses) {
    out << csv_field(r.user_id) << ',' << format_timestamp(r.at) << ',' << r.level << '\n';
  }
}

}  // namespace appstress
