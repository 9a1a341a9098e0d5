#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace depbreak {

using Date = std::chrono::year_month_day;

/// Accepts ISO-8601 (YYYY-MM-DD) and DD.MM.YYYY.
std::optional<Date> parse_date(std::string_view text);

/// Canonical ISO-8601 rendering.
std::string format_date(const Date& date);

}  // namespace depbreak
