#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace evtrack::text {

// Fixed-point rendering with `decimals` digits; "-0.000" is normalized to "0.000".
void append_fixed(std::string& out, double v, int decimals);
std::string fixed(double v, int decimals);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Strict whole-field parsers; return false on any trailing garbage.
bool parse_u64(std::string_view s, std::uint64_t& out);
bool parse_i64(std::string_view s, std::int64_t& out);
bool parse_double(std::string_view s, double& out);

// getline that strips a trailing '\r'.
bool read_line(std::istream& in, std::string& line);

// Binary-mode file streams; throw Error(io_failure) when the file cannot be opened.
std::ifstream open_in(const std::filesystem::path& path);
std::ofstream open_out(const std::filesystem::path& path);

}  // namespace evtrack::text
