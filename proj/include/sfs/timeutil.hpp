/*
 * Copyright 2026 The sfsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "sfs/error.hpp"

namespace sfs {

using Nanos = std::chrono::nanoseconds;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  pos += count;
  out = value;
  return true;
}

}  // namespace detail

// Parses ISO-8601 date or date-time into nanoseconds since the Unix epoch
// (UTC). Accepts `YYYY-MM-DD`, optional `T` or space then `HH:MM[:SS[.f]]`
// with up to nine fraction digits, and an optional `Z` or `+HH:MM` /
// `+HHMM` offset. Local times without offset are taken as UTC.
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  std::size_t pos = 0;
  int year = 0, month = 0, day = 0;
  if (!detail::read_digits(s, pos, 4, year)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!detail::read_digits(s, pos, 2, month)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!detail::read_digits(s, pos, 2, day)) return std::nullopt;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;

  int hour = 0, minute = 0, second = 0;
  std::int64_t fraction_ns = 0;
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!detail::read_digits(s, pos, 2, hour)) return std::nullopt;
    if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!detail::read_digits(s, pos, 2, minute)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!detail::read_digits(s, pos, 2, second)) return std::nullopt;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (digits < 9) {
            fraction_ns = fraction_ns * 10 + (s[pos] - '0');
            ++digits;
          }
          ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (int i = digits; i < 9; ++i) fraction_ns *= 10;
      }
    }
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    if (pos < s.size()) {
      if (s[pos] == 'Z') {
        ++pos;
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = 0, om = 0;
        if (!detail::read_digits(s, pos, 2, oh)) return std::nullopt;
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (!detail::read_digits(s, pos, 2, om)) return std::nullopt;
        offset_minutes = sign * (oh * 60 + om);
      }
    }
  }
  if (pos != s.size()) return std::nullopt;

  const auto days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t secs = static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 +
                            second - static_cast<std::int64_t>(offset_minutes) * 60;
  return secs * 1'000'000'000 + fraction_ns;
}

// Inverse of parse_iso8601 for UTC: `YYYY-MM-DDTHH:MM:SS[.fffffffff]Z`.
inline std::string format_iso8601(std::int64_t ns_since_epoch) {
  using namespace std::chrono;
  const sys_time<nanoseconds> tp{nanoseconds{ns_since_epoch}};
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const auto in_day = tp - day_point;
  const auto h = duration_cast<hours>(in_day);
  const auto m = duration_cast<minutes>(in_day - h);
  const auto sec = duration_cast<seconds>(in_day - h - m);
  const auto frac = (in_day - h - m - sec).count();

  char buf[48];
  int len = std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                          static_cast<int>(h.count()), static_cast<int>(m.count()),
                          static_cast<int>(sec.count()));
  std::string out(buf, static_cast<std::size_t>(len));
  if (frac != 0) {
    std::snprintf(buf, sizeof(buf), ".%09lld", static_cast<long long>(frac));
    out += buf;
  }
  out += 'Z';
  return out;
}

// Durations such as `7d`, `168h`, `20w`, `90m`, `30s`. A bare number is
// read as seconds.
inline Nanos parse_duration(std::string_view text) {
  if (text.empty()) throw Error(Errc::InvalidArgument, "empty duration");
  std::int64_t amount = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, amount);
  if (ec != std::errc{} || amount < 0) {
    throw Error(Errc::InvalidArgument, "bad duration '" + std::string(text) + "'");
  }
  const std::string_view unit(ptr, static_cast<std::size_t>(last - ptr));
  using namespace std::chrono;
  if (unit.empty() || unit == "s") return seconds{amount};
  if (unit == "m") return minutes{amount};
  if (unit == "h") return hours{amount};
  if (unit == "d") return hours{24 * amount};
  if (unit == "w") return hours{24 * 7 * amount};
  throw Error(Errc::InvalidArgument, "bad duration unit in '" + std::string(text) + "'");
}

}  // namespace sfs
