#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/keyframes.hpp"
#include "gaze2aoi/overlay.hpp"

namespace gaze2aoi {

/// Run-time settings. Every key has a default; unknown keys are rejected.
struct Config {
  double gaze_offset_ms = 0.0;
  std::int64_t gap_frames = 0;
  KeyframeRule keyframe_rule = KeyframeRule::SignatureChange;
  /// ECMAScript regex applied to the file name; capture group 1 is the
  /// subject id.
  std::string subject_pattern = "^([^_]+)_";
  std::vector<std::string> adapter_cmd{"gaze2aoi-adapter"};
  std::vector<std::string> decoder_cmd{"ffmpeg", "-v", "error", "-i", "{input}", "-f", "rawvideo", "-pix_fmt",
                                       "rgb24", "-"};
  std::vector<std::string> encoder_cmd{"ffmpeg", "-v", "error", "-y", "-f", "rawvideo", "-pix_fmt", "rgb24",
                                       "-s", "{width}x{height}", "-r", "{fps}", "-i", "-", "{output}"};
  Palette colors;
};

inline constexpr std::string_view kConfigKeys[] = {"gaze_offset_ms", "gap_frames",  "keyframe_rule",
                                                   "subject_pattern", "adapter_cmd", "decoder_cmd",
                                                   "encoder_cmd",    "colors"};

/// Applies one key; throws Error(InvalidConfig) on unknown keys or bad values.
void set_config_value(Config& config, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment line.
Config parse_config(std::string_view text, Config base = {});

/// File (when given) then `GAZE2AOI_<KEY>` environment overrides.
Config load_config(const std::optional<std::filesystem::path>& path);

/// `green=#00c800,red=#dc0000,purple=#a020f0`; omitted names keep defaults.
Palette parse_palette(std::string_view text, Palette base = {});

/// Subject id of a path's file name, or nullopt when the pattern does not
/// match.
std::optional<std::string> extract_subject(const std::filesystem::path& path, const std::string& pattern);

}  // namespace gaze2aoi
