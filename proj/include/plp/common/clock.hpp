#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace plp {

// Returns a UTC instant formatted as "YYYY-MM-DDTHH:MM:SSZ".
using Clock = std::function<std::string()>;

Clock system_clock();

// Deterministic clock: starts at `start_epoch_seconds` and advances by
// `step_seconds` per call. Thread-safe.
Clock stepping_clock(std::int64_t start_epoch_seconds, std::int64_t step_seconds = 1);

std::string format_utc(std::int64_t epoch_seconds);

// Accepts "YYYY-MM-DD". Throws InvalidArgument on anything else.
void check_calendar_date(const std::string& date);

}  // namespace plp
