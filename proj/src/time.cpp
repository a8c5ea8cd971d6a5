// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace smokegrid {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return true;
}

std::chrono::year_month_day ymd_of(Timestamp t) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{t}};
  return year_month_day{floor<days>(tp)};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  int y, mo, d, h, mi, se;
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, mo) || !read_int(s, 8, 2, d) || !read_int(s, 11, 2, h) ||
      !read_int(s, 14, 2, mi) || !read_int(s, 17, 2, se))
    return std::nullopt;
  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!date.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
  const auto tp = sys_days{date} + hours{h} + minutes{mi} + seconds{se};
  return tp.time_since_epoch().count();
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{t}};
  const auto day_start = floor<days>(tp);
  const year_month_day date{day_start};
  const hh_mm_ss tod{tp - day_start};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<long long>(tod.hours().count()), static_cast<long long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()));
  return buf;
}

unsigned month_of(Timestamp t) { return static_cast<unsigned>(ymd_of(t).month()); }

SeasonBucket season_of(Timestamp t) {
  switch (month_of(t)) {
    case 4:
    case 5: return SeasonBucket::early;
    case 6:
    case 7:
    case 8: return SeasonBucket::mid;
    case 9:
    case 10: return SeasonBucket::late;
    default: return SeasonBucket::off_season;
  }
}

std::string_view bucket_name(SeasonBucket b) {
  switch (b) {
    case SeasonBucket::early: return "Early";
    case SeasonBucket::mid: return "Mid";
    case SeasonBucket::late: return "Late";
    case SeasonBucket::off_season: return "OffSeason";
  }
  return "?";
}

}  // namespace smokegrid
