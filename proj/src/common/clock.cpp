#include "plp/common/clock.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "plp/common/error.hpp"

namespace plp {

std::string format_utc(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Clock system_clock() {
  return [] {
    auto now = std::chrono::system_clock::now();
    return format_utc(std::chrono::duration_cast<std::chrono::seconds>(
                          now.time_since_epoch())
                          .count());
  };
}

Clock stepping_clock(std::int64_t start_epoch_seconds, std::int64_t step_seconds) {
  auto counter = std::make_shared<std::atomic<std::int64_t>>(0);
  return [counter, start_epoch_seconds, step_seconds] {
    auto n = counter->fetch_add(1);
    return format_utc(start_epoch_seconds + n * step_seconds);
  };
}

void check_calendar_date(const std::string& date) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (date.size() != 10 ||
      std::sscanf(date.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 ||
      date[4] != '-' || date[7] != '-' || m < 1 || m > 12 || d < 1 || d > 31) {
    throw Error(ErrorCode::InvalidArgument,
                "expected calendar date YYYY-MM-DD, got '" + date + "'");
  }
}

}  // namespace plp
