#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtr::detail {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Splits one delimited record. Handles single and double quotes with
/// backslash escapes (ARFF) or doubled-quote escapes (CSV).
std::vector<std::string> split_record(std::string_view line, bool arff_quoting);

/// Parses a complete finite floating-point literal; nullopt otherwise.
std::optional<double> parse_number(std::string_view s);

/// Round-trip exact textual form of a double.
std::string format_double(double v);

/// Quotes `s` for ARFF output when it contains separators or spaces.
std::string arff_quote(const std::string& s);

/// Quotes `s` for CSV output per RFC 4180 when needed.
std::string csv_quote(const std::string& s);

std::string read_file(const std::string& path);

}  // namespace mtr::detail
