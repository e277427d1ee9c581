#include "eucgov/date.hpp"

#include <charconv>
#include <cstdio>

#include "eucgov/error.hpp"

namespace eucgov {

namespace {

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  auto first = text.data() + pos;
  for (std::size_t i = 0; i < len; ++i) {
    if (first[i] < '0' || first[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::InvalidInput, "invalid calendar date");
  }
  days_ = std::chrono::sys_days{ymd};
}

std::optional<Date> Date::try_parse(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, m) || !parse_fixed(text, 8, 2, d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view text, std::string_view field) {
  if (auto d = try_parse(text)) return *d;
  throw Error(ErrorCode::InvalidInput,
              std::string(field) + ": expected YYYY-MM-DD, got '" + std::string(text) + "'",
              std::string(field));
}

Date Date::today() {
  return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

std::string Date::to_string() const {
  auto ymd = this->ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date Date::plus_one_year() const {
  auto next = ymd() + std::chrono::years{1};
  if (!next.ok()) {
    next = next.year() / next.month() / std::chrono::last;
  }
  return Date{std::chrono::sys_days{next}};
}

std::string format_timestamp(Timestamp ts) {
  auto day = std::chrono::floor<std::chrono::days>(ts);
  std::chrono::hh_mm_ss tod{ts - day};
  std::string out = Date{day}.to_string();
  char buf[24];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d.%03dZ", static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()), static_cast<int>(tod.seconds().count()),
                static_cast<int>(tod.subseconds().count()));
  return out + buf;
}

Timestamp parse_timestamp(std::string_view text) {
  // 2018-05-01T12:34:56.789Z
  int hh = 0, mm = 0, ss = 0, ms = 0;
  auto date = Date::try_parse(text.substr(0, 10));
  bool ok = date && text.size() == 24 && text[10] == 'T' && text[13] == ':' && text[16] == ':' &&
            text[19] == '.' && text[23] == 'Z' && parse_fixed(text, 11, 2, hh) &&
            parse_fixed(text, 14, 2, mm) && parse_fixed(text, 17, 2, ss) &&
            parse_fixed(text, 20, 3, ms) && hh < 24 && mm < 60 && ss < 60;
  if (!ok) {
    throw Error(ErrorCode::InvalidInput, "bad timestamp '" + std::string(text) + "'");
  }
  return Timestamp{date->days()} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss} + std::chrono::milliseconds{ms};
}

}  // namespace eucgov
