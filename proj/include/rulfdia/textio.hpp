#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rulfdia::text {

// Locale-independent number formatting. format_double emits the shortest
// representation that parses back to the identical double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view token);
std::optional<std::int64_t> parse_int(std::string_view token);
std::optional<std::uint64_t> parse_uint(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Ordered `key = value` entries. Blank lines and lines starting with '#' are
/// skipped; anything else without '=' is a ParseError naming the line.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values(std::string_view text);

/// 64-bit FNV-1a. Stable across platforms, used for config hashes and stream ids.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace rulfdia::text
