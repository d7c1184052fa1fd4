#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gfse {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Whole-string parses; throw ParseError carrying `line`.
double parse_double(std::string_view text, std::size_t line = 0);
std::uint64_t parse_u64(std::string_view text, std::size_t line = 0);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace gfse
