#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "appstress/ingest.hpp"
#include "appstress/taxonomy.hpp"
#include "appstress/timeutil.hpp"

namespace appstress {

inline constexpr std::size_t kFeatureCount = 11;

/// Column names in vector order: five frequencies, five durations (seconds),
/// then the distinct-app count.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "freq_ent",    "freq_social", "freq_game",    "freq_utility", "freq_browser",    "time_ent",
    "time_social", "time_game",   "time_utility", "time_browser", "unique_app_count"};

/// Index of a category's frequency feature; its time feature sits 5 later.
/// Unknown has no slot and must not be passed.
std::size_t feature_slot(AppCategory category);

struct DailyFeatureVector {
  std::string user_id;
  Date date;
  std::array<std::int64_t, kFeatureCount> values{};

  std::int64_t freq(AppCategory c) const { return values[feature_slot(c)]; }
  std::int64_t time(AppCategory c) const { return values[feature_slot(c) + 5]; }
  std::int64_t unique_apps() const { return values[10]; }
  std::vector<double> as_doubles() const { return {values.begin(), values.end()}; }

  friend bool operator==(const DailyFeatureVector&, const DailyFeatureVector&) = default;
};

struct DailyLabel {
  std::string user_id;
  Date date;
  int level = 0;
  int n_responses = 0;

  friend bool operator==(const DailyLabel&, const DailyLabel&) = default;
};

/// How a day's EMA answers collapse to one label. `Mean` rounds half up.
enum class LabelReducer { Mean, Max, Last };

std::string_view to_string(LabelReducer reducer);
std::optional<LabelReducer> parse_label_reducer(std::string_view name);

/// Splits events at local midnight and counts per (user, day). Output is
/// sorted by (user, date); days without events are absent.
std::vector<DailyFeatureVector> extract_daily_features(std::span<const AppEvent> events,
                                                       const Taxonomy& taxonomy, const Zone& zone);

std::vector<DailyLabel> aggregate_daily_labels(std::span<const EmaResponse> responses, const Zone& zone,
                                               LabelReducer reducer = LabelReducer::Mean);

struct LabeledDay {
  DailyFeatureVector features;
  int level = 0;
};

struct JoinReport {
  std::size_t matched = 0;
  std::size_t unmatched_features = 0;
  std::size_t unmatched_labels = 0;
};

struct JoinResult {
  std::vector<LabeledDay> pairs;  // sorted by (user, date)
  JoinReport report;
};

JoinResult join_features_labels(std::span<const DailyFeatureVector> features,
                                std::span<const DailyLabel> labels);

void write_features_csv(std::ostream& out, std::span<const DailyFeatureVector> features);
void write_labels_csv(std::ostream& out, std::span<const DailyLabel> labels);
/// Readers for the files above. Any malformed row is a schema error: these
/// files are produced by this tool, not collected in the field.
std::vector<DailyFeatureVector> read_features_csv(std::istream& in);
std::vector<DailyLabel> read_labels_csv(std::istream& in);

}  // namespace appstress
