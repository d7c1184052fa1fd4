#include "gfse/text.hpp"

#include <charconv>
#include <cstdint>

#include "gfse/errors.hpp"

namespace gfse {

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line) {
  text = trim(text);
  double x = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + std::string(text) + "'", line);
  }
  return x;
}

std::uint64_t parse_u64(std::string_view text, std::size_t line) {
  text = trim(text);
  std::uint64_t x = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not an unsigned integer: '" + std::string(text) + "'", line);
  }
  return x;
}

std::string_view trim(std::string_view s) noexcept {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace gfse
