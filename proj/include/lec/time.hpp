// Copyright 2026 The lecsettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace lec {

/// Interval-start instants are whole seconds in UTC.
using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline std::optional<int> parse_fixed_int(std::string_view s, std::size_t pos,
                                          std::size_t len) {
  if (pos + len > s.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    value = value * 10 + (s[i] - '0');
  }
  return value;
}

}  // namespace detail

/// Parses `YYYY-MM-DDTHH:MM:SS` followed by `Z` or a `+HH:MM`/`-HH:MM`
/// offset. Fractional seconds are not accepted (meter data is interval aligned).
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  if (s.size() < 20) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  auto yy = detail::parse_fixed_int(s, 0, 4);
  auto mo = detail::parse_fixed_int(s, 5, 2);
  auto dd = detail::parse_fixed_int(s, 8, 2);
  auto hh = detail::parse_fixed_int(s, 11, 2);
  auto mi = detail::parse_fixed_int(s, 14, 2);
  auto ss = detail::parse_fixed_int(s, 17, 2);
  if (!yy || !mo || !dd || !hh || !mi || !ss) return std::nullopt;
  if (*hh > 23 || *mi > 59 || *ss > 59) return std::nullopt;
  year_month_day ymd{year{*yy}, month{static_cast<unsigned>(*mo)},
                     day{static_cast<unsigned>(*dd)}};
  if (!ymd.ok()) return std::nullopt;

  seconds offset{0};
  std::string_view zone = s.substr(19);
  if (zone == "Z" || zone == "z") {
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') &&
             zone[3] == ':') {
    auto oh = detail::parse_fixed_int(zone, 1, 2);
    auto om = detail::parse_fixed_int(zone, 4, 2);
    if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
    offset = hours{*oh} + minutes{*om};
    if (zone[0] == '-') offset = -offset;
  } else {
    return std::nullopt;
  }
  return Timestamp{sys_days{ymd}} + hours{*hh} + minutes{*mi} + seconds{*ss} -
         offset;
}

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  auto day_start = floor<days>(t);
  year_month_day ymd{day_start};
  hh_mm_ss<seconds> tod{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Strict parse: the whole field must be a number, surrounding blanks allowed.
inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace lec
