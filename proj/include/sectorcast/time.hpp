#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sectorcast {

// All timestamps are UTC seconds since the Unix epoch, second resolution.
using Timestamp = std::int64_t;

constexpr std::int64_t kSecondsPerMinute = 60;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr int kMinutesPerDay = 1440;

// Accepted year range for message timestamps.
constexpr int kMinYear = 1970;
constexpr int kMaxYear = 2199;

enum class Weekday { Mon = 0, Tue, Wed, Thu, Fri, Sat, Sun };

inline const char* weekday_name(Weekday w) {
  static const char* names[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  return names[static_cast<int>(w)];
}

inline std::optional<Weekday> weekday_from_name(std::string_view s) {
  for (int i = 0; i < 7; ++i)
    if (s == weekday_name(static_cast<Weekday>(i))) return static_cast<Weekday>(i);
  return std::nullopt;
}

// UTC calendar date.
struct UtcDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend bool operator==(const UtcDate&, const UtcDate&) = default;
  friend auto operator<=>(const UtcDate&, const UtcDate&) = default;
};

namespace detail {

// Days since 1970-01-01 from a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline UtcDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return UtcDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

inline int days_in_month(int y, int m) {
  static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return mdays[m - 1];
}

inline bool parse_fixed_uint(std::string_view s, size_t pos, size_t len, int& out) {
  int v = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

inline std::int64_t epoch_days(const UtcDate& d) {
  return detail::days_from_civil(d.year, d.month, d.day);
}

inline UtcDate date_from_epoch_days(std::int64_t days) { return detail::civil_from_days(days); }

inline Timestamp day_start(const UtcDate& d) { return epoch_days(d) * kSecondsPerDay; }

inline UtcDate date_of(Timestamp t) {
  std::int64_t days = t / kSecondsPerDay;
  if (t < 0 && t % kSecondsPerDay != 0) --days;
  return date_from_epoch_days(days);
}

inline UtcDate add_days(const UtcDate& d, int n) { return date_from_epoch_days(epoch_days(d) + n); }

// 1970-01-01 was a Thursday.
inline Weekday weekday_of(const UtcDate& d) {
  std::int64_t w = (epoch_days(d) + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<Weekday>(w);
}

inline int day_of_year(const UtcDate& d) {
  return static_cast<int>(epoch_days(d) - detail::days_from_civil(d.year, 1, 1)) + 1;
}

// Minute slot of `t` within its own calendar day, 0..1439.
inline int minute_of_day(Timestamp t) {
  std::int64_t rem = t - day_start(date_of(t));
  return static_cast<int>(rem / kSecondsPerMinute);
}

inline Timestamp floor_to_minute(Timestamp t) {
  std::int64_t m = t / kSecondsPerMinute;
  if (t < 0 && t % kSecondsPerMinute != 0) --m;
  return m * kSecondsPerMinute;
}

inline bool valid_date(int y, int m, int d) {
  return y >= kMinYear && y <= kMaxYear && m >= 1 && m <= 12 && d >= 1 &&
         d <= detail::days_in_month(y, m);
}

// "YYYY-MM-DD", strict.
inline std::optional<UtcDate> parse_date(std::string_view s) {
  int y, m, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::parse_fixed_uint(s, 0, 4, y) || !detail::parse_fixed_uint(s, 5, 2, m) ||
      !detail::parse_fixed_uint(s, 8, 2, d))
    return std::nullopt;
  if (!valid_date(y, m, d)) return std::nullopt;
  return UtcDate{y, m, d};
}

inline std::string format_date(const UtcDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return std::string(buf);
}

// "YYYY-MM-DDTHH:MM:SSZ", strict RFC 3339 UTC at second resolution.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  int hh, mm, ss;
  if (!detail::parse_fixed_uint(s, 11, 2, hh) || !detail::parse_fixed_uint(s, 14, 2, mm) ||
      !detail::parse_fixed_uint(s, 17, 2, ss))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return day_start(*date) + hh * 3600 + mm * 60 + ss;
}

// Unwrapping parses for trusted inputs (our own serialized artifacts).
inline Timestamp require_timestamp(std::string_view s) {
  auto t = parse_timestamp(s);
  if (!t) throw std::runtime_error("bad timestamp: " + std::string(s));
  return *t;
}

inline UtcDate require_date(std::string_view s) {
  auto d = parse_date(s);
  if (!d) throw std::runtime_error("bad date: " + std::string(s));
  return *d;
}

inline std::string format_timestamp(Timestamp t) {
  UtcDate d = date_of(t);
  std::int64_t rem = t - day_start(d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return std::string(buf);
}

}  // namespace sectorcast
