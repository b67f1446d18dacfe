#pragma once

#include <filesystem>
#include <string_view>

namespace amlc {

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failure never leaves a partial file behind. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace amlc
