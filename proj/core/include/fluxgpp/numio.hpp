#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fluxgpp {

/// Shortest decimal form that round-trips to the same double
/// (std::to_chars). Every number we persist goes through this, so repeated
/// runs produce byte-identical files and readers recover exact values.
std::string format_double(double v);

/// Strict double parse of the whole string. Throws InputError on failure.
double parse_double(std::string_view s, std::string_view what);

/// Strict non-negative integer parse. Throws InputError on failure.
long long parse_int(std::string_view s, std::string_view what);

/// Split one CSV line on commas. No quoting: the formats used here never
/// embed commas in fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Read a whole file; throws InputError if it cannot be opened.
std::string read_text_file(const std::string& path);

/// Write a file atomically enough for our purposes (truncate + write).
void write_text_file(const std::string& path, std::string_view content);

/// True if `s` looks like YYYY-MM-DD with plausible month/day ranges.
bool is_iso_date(std::string_view s);

} // namespace fluxgpp
