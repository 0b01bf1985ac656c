#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "heatcast/errors.hpp"

namespace heatcast {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
// Arithmetic in days; ISO-8601 (YYYY-MM-DD) text form.
class Date {
 public:
  Date() = default;
  explicit constexpr Date(std::int64_t serial) : serial_(serial) {}

  static constexpr Date from_ymd(int y, int m, int d) {
    // Howard Hinnant's days_from_civil.
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
        static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return Date(era * 146097 + static_cast<std::int64_t>(doe) - 719468);
  }

  static Date parse(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char tail = '\0';
    if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3 ||
        m < 1 || m > 12 || d < 1 || d > 31) {
      throw DataError("invalid ISO date: '" + iso + "'");
    }
    return from_ymd(y, m, d);
  }

  struct Ymd {
    int year;
    int month;
    int day;
  };

  constexpr Ymd ymd() const {
    // Hinnant's civil_from_days.
    std::int64_t z = serial_ + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
            static_cast<int>(d)};
  }

  std::string iso() const {
    const Ymd v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", v.year, v.month, v.day);
    return buf;
  }

  constexpr std::int64_t serial() const { return serial_; }

  friend constexpr Date operator+(Date a, std::int64_t days) {
    return Date(a.serial_ + days);
  }
  friend constexpr Date operator-(Date a, std::int64_t days) {
    return Date(a.serial_ - days);
  }
  friend constexpr std::int64_t operator-(Date a, Date b) {
    return a.serial_ - b.serial_;
  }
  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int64_t serial_ = 0;
};

}  // namespace heatcast
