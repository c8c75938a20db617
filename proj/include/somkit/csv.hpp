#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace somkit::csv {

using Row = std::vector<std::string>;

/// Parses RFC-4180 style text: comma separated, double-quoted fields may hold
/// commas, quotes ("") and newlines. CRLF and LF line endings are accepted;
/// a trailing newline does not produce an empty row.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a file. Throws DataError if it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

std::string join(const Row& row);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest round-trip formatting ("%.17g" trimmed); identical across runs.
std::string format_double(double v);

std::string_view trim(std::string_view s);

} // namespace somkit::csv
