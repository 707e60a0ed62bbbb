#pragma once

// CSV and number formatting helpers shared by the file-format modules.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gaze2aoi::text {

struct Line {
  std::size_t number = 0;  // 1-based, header is line 1
  std::string_view content;
};

/// Splits into LF-terminated lines, dropping a UTF-8 BOM, a trailing CR on
/// each line and blank lines.
std::vector<Line> split_lines(std::string_view bytes);

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_record(std::string_view line);

/// Quotes the field when it contains a comma, quote or line break.
std::string quote_field(std::string_view field);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest representation that round-trips to the same double.
std::string format_shortest(double v);
/// Fixed notation, correctly rounded (ties to even), trailing zeros kept.
std::string format_fixed(double v, int precision);
/// As format_fixed, then trailing zeros and a dangling point are removed.
std::string format_trimmed(double v, int precision);

std::string_view trim(std::string_view s);

}  // namespace gaze2aoi::text
