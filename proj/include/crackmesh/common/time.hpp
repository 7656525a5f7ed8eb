#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace crackmesh {

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

using Clock = std::function<TimestampMs()>;

TimestampMs system_now_ms();

/// "2024-05-01T12:00:00.250Z"
std::string format_iso8601(TimestampMs at);

/// "2024-05-01"
std::string format_day(TimestampMs at);

}  // namespace crackmesh
