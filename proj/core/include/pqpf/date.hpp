#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace pqpf {

using Date = std::chrono::sys_days;

// Strict ISO-8601 calendar day, YYYY-MM-DD. Throws Error(Parse) otherwise.
Date parse_date(std::string_view text);
std::string format_date(Date d);

inline long day_number(Date d) noexcept { return d.time_since_epoch().count(); }

}  // namespace pqpf
