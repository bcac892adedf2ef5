#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sigdiag/common.hpp"

namespace sigdiag {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Strict double parse of the whole token; `where` prefixes the error message.
double parse_double(std::string_view token, const std::string& where);

// Whole-file read; throws IoError with the path on failure.
std::string read_file(const std::filesystem::path& path);

// Write via a sibling temp file and rename, so readers never observe a
// partially written file. Throws IoError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sigdiag
