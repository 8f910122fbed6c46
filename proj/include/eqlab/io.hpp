#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eqlab::io {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::vector<std::string_view> split_csv_line(std::string_view line);

// Strict parsers: the whole field must be consumed. Return false on failure.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, std::int64_t& out);
bool parse_uint64(std::string_view text, std::uint64_t& out);

std::vector<double> parse_double_list(std::string_view text);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace eqlab::io
