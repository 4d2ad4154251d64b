#include "appstress/features.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <tuple>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "features";

using DayKey = std::pair<std::string, Date>;

struct DayAccumulator {
  std::array<std::int64_t, kFeatureCount> values{};
  std::set<std::string, std::less<>> apps;
};

template <typename Int>
Int parse_int(std::string_view text, std::size_t line, std::string_view column) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    raise(ErrorKind::Schema, kModule,
          "line " + std::to_string(line) + ": bad integer in " + std::string(column));
  }
  return value;
}

Date parse_date_field(std::string_view text, std::size_t line) {
  const auto d = parse_date(text);
  if (!d) raise(ErrorKind::Schema, kModule, "line " + std::to_string(line) + ": bad date");
  return *d;
}

}  // namespace

std::size_t feature_slot(AppCategory category) {
  for (std::size_t i = 0; i < kFeatureCategories.size(); ++i) {
    if (kFeatureCategories[i] == category) return i;
  }
  raise(ErrorKind::InvalidArgument, kModule, "category has no feature slot");
}

std::string_view to_string(LabelReducer reducer) {
  switch (reducer) {
    case LabelReducer::Mean: return "mean";
    case LabelReducer::Max: return "max";
    case LabelReducer::Last: return "last";
  }
  return "mean";
}

std::optional<LabelReducer> parse_label_reducer(std::string_view name) {
  for (const auto r : {LabelReducer::Mean, LabelReducer::Max, LabelReducer::Last}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::vector<DailyFeatureVector> extract_daily_features(std::span<const AppEvent> events,
                                                       const Taxonomy& taxonomy, const Zone& zone) {
  std::map<DayKey, DayAccumulator> days;
  for (const auto& e : events) {
    if (e.end <= e.start) continue;
    const AppCategory category = taxonomy.categorize(e.app_id);
    Timestamp cursor = e.start;
    while (cursor < e.end) {
      const Date day = zone.local_day(cursor);
      Timestamp piece_end = std::min(e.end, zone.day_start(day + 1));
      if (piece_end <= cursor) piece_end = e.end;
      auto& acc = days[{e.user_id, day}];
      acc.apps.insert(e.app_id);
      if (category != AppCategory::Unknown) {
        const std::size_t slot = feature_slot(category);
        acc.values[slot] += 1;
        acc.values[slot + 5] += piece_end - cursor;
      }
      cursor = piece_end;
    }
  }
  std::vector<DailyFeatureVector> out;
  out.reserve(days.size());
  for (auto& [key, acc] : days) {
    acc.values[10] = static_cast<std::int64_t>(acc.apps.size());
    out.push_back({key.first, key.second, acc.values});
  }
  return out;
}

std::vector<DailyLabel> aggregate_daily_labels(std::span<const EmaResponse> responses, const Zone& zone,
                                               LabelReducer reducer) {
  std::map<DayKey, std::vector<std::pair<Timestamp, int>>> days;
  for (const auto& r : responses) days[{r.user_id, zone.local_day(r.at)}].emplace_back(r.at, r.level);

  std::vector<DailyLabel> out;
  out.reserve(days.size());
  for (auto& [key, answers] : days) {
    std::sort(answers.begin(), answers.end());
    const auto n = static_cast<int>(answers.size());
    int level = 0;
    switch (reducer) {
      case LabelReducer::Mean: {
        int sum = 0;
        for (const auto& a : answers) sum += a.second;
        // floor(sum / n + 1/2) in integers
        level = (2 * sum + n) / (2 * n);
        break;
      }
      case LabelReducer::Max:
        for (const auto& a : answers) level = std::max(level, a.second);
        break;
      case LabelReducer::Last:
        level = answers.back().second;
        break;
    }
    out.push_back({key.first, key.second, level, n});
  }
  return out;
}

JoinResult join_features_labels(std::span<const DailyFeatureVector> features,
                                std::span<const DailyLabel> labels) {
  std::map<std::pair<std::string_view, Date>, int> label_of;
  for (const auto& l : labels) label_of.emplace(std::pair<std::string_view, Date>{l.user_id, l.date}, l.level);

  JoinResult result;
  for (const auto& f : features) {
    const auto it = label_of.find({f.user_id, f.date});
    if (it == label_of.end()) {
      ++result.report.unmatched_features;
      continue;
    }
    result.pairs.push_back({f, it->second});
  }
  result.report.matched = result.pairs.size();
  result.report.unmatched_labels = labels.size() - result.pairs.size();
  std::sort(result.pairs.begin(), result.pairs.end(), [](const LabeledDay& a, const LabeledDay& b) {
    return std::tie(a.features.user_id, a.features.date) < std::tie(b.features.user_id, b.features.date);
  });
  return result;
}

void write_features_csv(std::ostream& out, std::span<const DailyFeatureVector> features) {
  out << "user_id,date";
  for (const auto name : kFeatureNames) out << ',' << name;
  out << '\n';
  for (const auto& f : features) {
    out << csv_field(f.user_id) << ',' << format_date(f.date);
    for (const auto v : f.values) out << ',' << v;
    out << '\n';
  }
}

void write_labels_csv(std::ostream& out, std::span<const DailyLabel> labels) {
  out << "user_id,date,level,n_responses\n";
  for (const auto& l : labels) {
    out << csv_field(l.user_id) << ',' << format_date(l.date) << ',' << l.level << ',' << l.n_responses << '\n';
  }
}

std::vector<DailyFeatureVector> read_features_csv(std::istream& in) {
  CsvReader reader(in, kModule);
  const std::size_t user_col = reader.require_column("user_id");
  const std::size_t date_col = reader.require_column("date");
  std::array<std::size_t, kFeatureCount> cols{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) cols[i] = reader.require_column(kFeatureNames[i]);

  std::vector<DailyFeatureVector> out;
  CsvRecord record;
  std::string error;
  while (reader.next(record, error)) {
    if (!error.empty()) raise(ErrorKind::Schema, kModule, "line " + std::to_string(record.line) + ": " + error);
    DailyFeatureVector f;
    f.user_id = record.fields[user_col];
    f.date = parse_date_field(record.fields[date_col], record.line);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      f.values[i] = parse_int<std::int64_t>(record.fields[cols[i]], record.line, kFeatureNames[i]);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<DailyLabel> read_labels_csv(std::istream& in) {
  CsvReader reader(in, kModule);
  const std::size_t user_col = reader.require_column("user_id");
  const std::size_t date_col = reader.require_column("date");
  const std::size_t level_col = reader.require_column("level");
  const std::size_t n_col = reader.require_column("n_responses");
  std::vector<DailyLabel> out;
  CsvRecord record;
  std::string error;
  while (reader.next(record, error)) {
    if (!error.empty()) raise(ErrorKind::Schema, kModule, "line " + std::to_string(record.line) + ": " + error);
    DailyLabel l;
    l.user_id = record.fields[user_col];
    l.date = parse_date_field(record.fields[date_col], record.line);
    l.level = parse_int<int>(record.fields[level_col], record.line, "level");
    l.n_responses = parse_int<int>(record.fields[n_col], record.line, "n_responses");
    if (l.level < 1 || l.level > 5) {
      raise(ErrorKind::Schema, kModule, "line " + std::to_string(record.line) + ": level outside 1..5");
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace appstress
