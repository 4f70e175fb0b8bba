#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dslq {

constexpr std::int64_t kSecondsPerDay = 86400;

// Epoch-seconds <-> "YYYY-MM-DDTHH:MM:SSZ". All timestamps are UTC,
// second precision.
std::string format_rfc3339(std::int64_t epoch_seconds);

// Accepts a full RFC 3339 timestamp ("2024-03-01T12:34:56Z") or a bare
// date ("2024-03-01", meaning midnight UTC). Returns nullopt on anything
// else.
std::optional<std::int64_t> parse_rfc3339(std::string_view text);

// Floor division into whole days since the epoch.
inline std::int64_t day_bucket(std::int64_t epoch_seconds) {
    std::int64_t d = epoch_seconds / kSecondsPerDay;
    if (epoch_seconds % kSecondsPerDay < 0)
        --d;
    return d;
}

} // namespace dslq
