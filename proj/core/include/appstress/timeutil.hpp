#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <absl/time/civil_time.h>
#include <absl/time/time.h>

namespace appstress {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Local calendar day.
using Date = absl::CivilDay;

/// Parses `YYYY-MM-DDThh:mm:ssZ`. Anything else (including out-of-range
/// fields such as month 13 or Feb 30) yields nullopt.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// Parses `YYYY-MM-DD`.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses `hh:mm` or `hh:mm:ss` into seconds after local midnight.
std::optional<int> parse_time_of_day(std::string_view text);

/// An IANA time zone. Construction fails with a config error for names the
/// zoneinfo database does not know.
class Zone {
 public:
  Zone();  // UTC
  explicit Zone(std::string_view name);

  const std::string& name() const noexcept { return name_; }

  Date local_day(Timestamp t) const;
  /// UTC instant of local midnight starting `day`. For gaps (midnight
  /// skipped by a DST jump) this is the transition instant.
  Timestamp day_start(Date day) const;
  Timestamp at_local(Date day, int seconds_after_midnight) const;

 private:
  std::string name_;
  absl::TimeZone tz_;
};

}  // namespace appstress
