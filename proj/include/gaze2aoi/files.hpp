#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gaze2aoi {

/// Whole-file read; throws Error(FileUnreadable).
std::string read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace gaze2aoi
