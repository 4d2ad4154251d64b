#include "appstress/timeutil.hpp"

#include <charconv>

#include "appstress/error.hpp"

namespace appstress {

namespace {

bool read_fixed(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

bool read_ymd(std::string_view text, int& y, int& m, int& d) {
  return read_fixed(text, 0, 4, y) && text[4] == '-' && read_fixed(text, 5, 2, m) &&
         text[7] == '-' && read_fixed(text, 8, 2, d);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_ymd(text, y, mo, d) || !read_fixed(text, 11, 2, h) || !read_fixed(text, 14, 2, mi) ||
      !read_fixed(text, 17, 2, s)) {
    return std::nullopt;
  }
  const absl::CivilSecond cs(y, mo, d, h, mi, s);
  // CivilSecond normalizes out-of-range fields; a round trip exposes them.
  if (cs.year() != y || cs.month() != mo || cs.day() != d || cs.hour() != h ||
      cs.minute() != mi || cs.second() != s) {
    return std::nullopt;
  }
  return absl::ToUnixSeconds(absl::FromCivil(cs, absl::UTCTimeZone()));
}

std::string format_timestamp(Timestamp t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", absl::FromUnixSeconds(t), absl::UTCTimeZone());
}

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || !read_ymd(text, y, m, d)) return std::nullopt;
  const Date day(y, m, d);
  if (day.year() != y || day.month() != m || day.day() != d) return std::nullopt;
  return day;
}

std::string format_date(Date d) { return absl::FormatCivilTime(d); }

std::optional<int> parse_time_of_day(std::string_view text) {
  int h = 0, m = 0, s = 0;
  if (text.size() == 5) {
    if (!read_fixed(text, 0, 2, h) || text[2] != ':' || !read_fixed(text, 3, 2, m)) return std::nullopt;
  } else if (text.size() == 8) {
    if (!read_fixed(text, 0, 2, h) || text[2] != ':' || !read_fixed(text, 3, 2, m) || text[5] != ':' ||
        !read_fixed(text, 6, 2, s)) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  // 24:00 is accepted as end-of-day.
  if (m > 59 || s > 59 || h > 24 || (h == 24 && (m != 0 || s != 0))) return std::nullopt;
  return h * 3600 + m * 60 + s;
}

Zone::Zone() : name_("UTC"), tz_(absl::UTCTimeZone()) {}

Zone::Zone(std::string_view name) : name_(name) {
  if (!absl::LoadTimeZone(name_, &tz_)) {
    raise(ErrorKind::Config, "time", "unknown time zone '" + name_ + "'");
  }
}

Date Zone::local_day(Timestamp t) const {
  return Date(absl::ToCivilSecond(absl::FromUnixSeconds(t), tz_));
}

Timestamp Zone::day_start(Date day) const { return at_local(day, 0); }

Timestamp Zone::at_local(Date day, int seconds_after_midnight) const {
  const absl::CivilSecond cs = absl::CivilSecond(day) + seconds_after_midnight;
  const absl::TimeZone::TimeInfo info = tz_.At(cs);
  const absl::Time t = info.kind == absl::TimeZone::TimeInfo::SKIPPED ? info.trans : info.pre;
  return absl::ToUnixSeconds(t);
}

}  // namespace appstress
