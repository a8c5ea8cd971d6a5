// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace smokegrid {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

constexpr Timestamp kHour = 3600;

/// Strict `YYYY-MM-DDTHH:MM:SSZ`; anything else yields nullopt.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
unsigned month_of(Timestamp t);

enum class SeasonBucket { early = 0, mid = 1, late = 2, off_season = 3 };

/// Early = Apr+May, Mid = Jun+Jul+Aug, Late = Sep+Oct, everything else off-season.
SeasonBucket season_of(Timestamp t);
std::string_view bucket_name(SeasonBucket b);

}  // namespace smokegrid
