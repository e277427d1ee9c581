#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace eucgov {

/// Calendar date, serialized as ISO-8601 `YYYY-MM-DD`.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Strict `YYYY-MM-DD` parse; throws Error{InvalidInput} on anything else.
  static Date parse(std::string_view text, std::string_view field = "date");
  static std::optional<Date> try_parse(std::string_view text);
  static Date today();

  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  std::chrono::sys_days days() const { return days_; }
  std::string to_string() const;

  /// Same month and day one year later; Feb 29 lands on Feb 28.
  Date plus_one_year() const;
  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }
  /// Signed day count from `this` to `later`.
  long days_until(Date later) const { return (later.days_ - days_).count(); }

  auto operator<=>(const Date&) const = default;
  bool operator==(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// `YYYY-MM-DDTHH:MM:SS.mmmZ`
std::string format_timestamp(Timestamp ts);
Timestamp parse_timestamp(std::string_view text);

}  // namespace eucgov
