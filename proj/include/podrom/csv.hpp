#pragma once

// Text helpers shared by all CSV writers and readers.

#include "podrom/linalg.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace podrom {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Inverse of format_double; also accepts inf/nan spellings.
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view line, char separator = ',');

/// Joins formatted numbers with commas.
std::string join(const std::vector<double>& values);
std::string join(const Vector& values);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// Lines of a text blob without trailing '\r'.
std::vector<std::string> lines_of(const std::string& text);

}  // namespace podrom
