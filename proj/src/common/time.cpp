#include "crackmesh/common/time.hpp"

#include <chrono>
#include <cstdio>

namespace crackmesh {
namespace {

struct CivilTime {
  int year;
  unsigned month, day, hour, minute, second, millis;
};

CivilTime to_civil(TimestampMs at) {
  using namespace std::chrono;
  sys_time<milliseconds> tp{milliseconds{at}};
  auto days = floor<std::chrono::days>(tp);
  year_month_day ymd{days};
  auto rest = tp - days;
  auto h = duration_cast<hours>(rest);
  rest -= h;
  auto m = duration_cast<minutes>(rest);
  rest -= m;
  auto s = duration_cast<seconds>(rest);
  rest -= s;
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), static_cast<unsigned>(h.count()),
          static_cast<unsigned>(m.count()), static_cast<unsigned>(s.count()),
          static_cast<unsigned>(rest.count())};
}

}  // namespace

TimestampMs system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_iso8601(TimestampMs at) {
  auto c = to_civil(at);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02u.%03uZ", c.year, c.month,
                c.day, c.hour, c.minute, c.second, c.millis);
  return buf;
}

std::string format_day(TimestampMs at) {
  auto c = to_civil(at);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

}  // namespace crackmesh
