#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace subblock::io {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Throws DataError with `context` on malformed input.
double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

std::vector<std::string> split(std::string_view line, char sep);

/// Lines of a text file with trailing '\r' removed. Throws DataError if unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Hex SHA-256 of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace subblock::io
