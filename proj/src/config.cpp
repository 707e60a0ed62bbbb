#include "gaze2aoi/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/process.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

[[noreturn]] void invalid(std::string_view key, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, std::string(key) + ": " + why);
}

std::vector<std::string> command_value(std::string_view key, std::string_view value) {
  auto argv = split_command(value);
  if (argv.empty()) invalid(key, "command is empty");
  return argv;
}

Rgb parse_hex(std::string_view name, std::string_view hex) {
  if (hex.size() != 7 || hex[0] != '#') invalid("colors", "expected #rrggbb for " + std::string(name));
  auto byte = [&](std::size_t at) {
    int v = 0;
    for (std::size_t i = at; i < at + 2; ++i) {
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[i])));
      int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : -1;
      if (d < 0) invalid("colors", "bad hex digit in " + std::string(hex));
      v = v * 16 + d;
    }
    return static_cast<std::uint8_t>(v);
  };
  return {byte(1), byte(3), byte(5)};
}

}  // namespace

Palette parse_palette(std::string_view text, Palette base) {
  std::string_view rest = text;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    auto item = text::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) invalid("colors", "expected name=#rrggbb");
    auto name = text::trim(item.substr(0, eq));
    auto rgb = parse_hex(name, text::trim(item.substr(eq + 1)));
    if (name == "green") {
      base.green = rgb;
    } else if (name == "red") {
      base.red = rgb;
    } else if (name == "purple") {
      base.purple = rgb;
    } else {
      invalid("colors", "unknown color name " + std::string(name));
    }
  }
  return base;
}

void set_config_value(Config& config, std::string_view key, std::string_view raw) {
  auto value = text::trim(raw);
  if (key == "gaze_offset_ms") {
    auto v = text::parse_double(value);
    if (!v) invalid(key, "not a number");
    config.gaze_offset_ms = *v;
  } else if (key == "gap_frames") {
    auto v = text::parse_int(value);
    if (!v || *v < 0) invalid(key, "expected a non-negative integer");
    config.gap_frames = *v;
  } else if (key == "keyframe_rule") {
    auto rule = parse_keyframe_rule(value);
    if (!rule) invalid(key, "expected signature_change or new_object_only");
    config.keyframe_rule = *rule;
  } else if (key == "subject_pattern") {
    try {
      std::regex re{std::string(value)};
      if (re.mark_count() < 1) invalid(key, "pattern needs a capture group");
    } catch (const std::regex_error& e) {
      invalid(key, e.what());
    }
    config.subject_pattern = std::string(value);
  } else if (key == "adapter_cmd") {
    config.adapter_cmd = command_value(key, value);
  } else if (key == "decoder_cmd") {
    config.decoder_cmd = command_value(key, value);
  } else if (key == "encoder_cmd") {
    config.encoder_cmd = command_value(key, value);
  } else if (key == "colors") {
    config.colors = parse_palette(value, config.colors);
  } else {
    invalid(key, "unknown key");
  }
}

Config parse_config(std::string_view content, Config base) {
  for (const auto& line : text::split_lines(content)) {
    auto body = text::trim(line.content);
    if (body.empty() || body.front() == '#') continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line.number) + ": expected key = value");
    }
    set_config_value(base, text::trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  return base;
}

Config load_config(const std::optional<std::filesystem::path>& path) {
  Config config;
  if (path) config = parse_config(read_file(*path));
  for (auto key : kConfigKeys) {
    std::string env = "GAZE2AOI_";
    for (char c : key) env.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (const char* v = std::getenv(env.c_str())) set_config_value(config, key, v);
  }
  return config;
}

std::optional<std::string> extract_subject(const std::filesystem::path& path, const std::string& pattern) {
  std::smatch m;
  const auto name = path.filename().string();
  if (!std::regex_search(name, m, std::regex(pattern)) || m.size() < 2 || !m[1].matched) return std::nullopt;
  return m[1].str();
}

}  // namespace gaze2aoi
