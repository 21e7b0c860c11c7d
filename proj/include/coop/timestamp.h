#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace coop {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

// UTC, second resolution, "YYYY-MM-DDTHH:MM:SSZ".
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

Timestamp now_utc();

}  // namespace coop
