#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace guidelm {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)". Throws ValidationError otherwise.
Timestamp parse_iso8601(std::string_view text);

/// UTC rendering; fractional seconds appear only when non-zero.
std::string format_iso8601(Timestamp t);

Timestamp now_utc();

}  // namespace guidelm
