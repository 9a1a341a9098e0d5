#include "depbreak/date.hpp"

#include <charconv>
#include <cstdio>

namespace depbreak {
namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::optional<Date> make_date(int y, int m, int d) {
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d))
      return std::nullopt;
    return make_date(y, m, d);
  }
  if (text.size() == 10 && text[2] == '.' && text[5] == '.') {
    if (!parse_int(text.substr(0, 2), d) || !parse_int(text.substr(3, 2), m) ||
        !parse_int(text.substr(6, 4), y))
      return std::nullopt;
    return make_date(y, m, d);
  }
  return std::nullopt;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

}  // namespace depbreak
