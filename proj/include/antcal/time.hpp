#ifndef ANTCAL_TIME_HPP
#define ANTCAL_TIME_HPP

// UTC time handling. Tracking tables use whole seconds of day; signal logs use
// ISO-8601 stamps which are held as seconds since midnight of a reference date.
// Fractional log times are quantized to microseconds so that text round trips
// are exact.

#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "antcal/text.hpp"

namespace antcal {

inline constexpr int kSecondsPerDay = 86400;

inline std::optional<int> parse_hms(std::string_view s) {
  s = text::trim(s);
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
  const auto h = text::to_int<int>(s.substr(0, 2));
  const auto m = text::to_int<int>(s.substr(3, 2));
  const auto sec = text::to_int<int>(s.substr(6, 2));
  if (!h || !m || !sec || *h > 23 || *m > 59 || *sec > 59 || *h < 0 || *m < 0 || *sec < 0) {
    return std::nullopt;
  }
  return *h * 3600 + *m * 60 + *sec;
}

inline std::string format_hms(int seconds_of_day) {
  const int h = seconds_of_day / 3600;
  const int m = (seconds_of_day / 60) % 60;
  const int s = seconds_of_day % 60;
  std::string out(8, '0');
  out[0] = static_cast<char>('0' + h / 10);
  out[1] = static_cast<char>('0' + h % 10);
  out[2] = ':';
  out[3] = static_cast<char>('0' + m / 10);
  out[4] = static_cast<char>('0' + m % 10);
  out[5] = ':';
  out[6] = static_cast<char>('0' + s / 10);
  out[7] = static_cast<char>('0' + s % 10);
  return out;
}

inline double seconds_from_micros(std::int64_t us) { return static_cast<double>(us) / 1e6; }
inline std::int64_t micros_from_seconds(double s) { return std::llround(s * 1e6); }

struct UtcStamp {
  std::chrono::sys_days date;
  std::int64_t micros_of_day = 0;
};

/// Accepts `YYYY-MM-DDTHH:MM:SS[.ffffff][Z]` (a space may replace the `T`).
inline std::optional<UtcStamp> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  s = text::trim(s);
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ')) {
    return std::nullopt;
  }
  const auto y = text::to_int<int>(s.substr(0, 4));
  const auto mo = text::to_int<unsigned>(s.substr(5, 2));
  const auto d = text::to_int<unsigned>(s.substr(8, 2));
  const auto hms = parse_hms(s.substr(11, 8));
  if (!y || !mo || !d || !hms) return std::nullopt;
  const year_month_day ymd{year{*y}, month{*mo}, day{*d}};
  if (!ymd.ok()) return std::nullopt;
  std::int64_t frac_us = 0;
  auto rest = s.substr(19);
  if (!rest.empty()) {
    if (rest.front() != '.' || rest.size() < 2 || rest.size() > 7) return std::nullopt;
    rest.remove_prefix(1);
    for (char c : rest) {
      if (c < '0' || c > '9') return std::nullopt;
    }
    std::string padded(rest);
    padded.resize(6, '0');
    frac_us = *text::to_int<std::int64_t>(padded);
  }
  return UtcStamp{sys_days{ymd}, static_cast<std::int64_t>(*hms) * 1'000'000 + frac_us};
}

/// `micros` is relative to midnight of `date` and may run past one day.
inline std::string format_iso8601(std::chrono::sys_days date, std::int64_t micros) {
  using namespace std::chrono;
  const std::int64_t day_us = static_cast<std::int64_t>(kSecondsPerDay) * 1'000'000;
  std::int64_t day_offset = micros / day_us;
  std::int64_t rem = micros % day_us;
  if (rem < 0) {
    rem += day_us;
    --day_offset;
  }
  const year_month_day ymd{date + days{day_offset}};
  const int secs = static_cast<int>(rem / 1'000'000);
  const std::int64_t frac = rem % 1'000'000;

  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  std::string out = std::string(buf) + "T" + format_hms(secs);
  if (frac != 0) {
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
    std::string f(buf);
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  out += "Z";
  return out;
}

inline std::optional<std::chrono::sys_days> parse_date(std::string_view s) {
  auto stamp = parse_iso8601(std::string(text::trim(s)) + "T00:00:00");
  if (!stamp) return std::nullopt;
  return stamp->date;
}

}  // namespace antcal

#endif  // ANTCAL_TIME_HPP
