#include <doctest.h>

#include <cstdlib>

#include "gaze2aoi/config.hpp"
#include "gaze2aoi/error.hpp"
#include "support.hpp"

using namespace gaze2aoi;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("defaults cover every key") {
  Config c;
  CHECK(c.gaze_offset_ms == 0.0);
  CHECK(c.gap_frames == 0);
  CHECK(c.keyframe_rule == KeyframeRule::SignatureChange);
  CHECK(c.subject_pattern == "^([^_]+)_");
  CHECK_FALSE(c.adapter_cmd.empty());
  CHECK(c.colors.green == Rgb{0, 200, 0});
  CHECK(c.colors.red == Rgb{220, 0, 0});
  CHECK(c.colors.purple == Rgb{160, 32, 240});
}

TEST_CASE("parse_config reads flat key = value lines") {
  auto c = parse_config(
      "# comment\n"
      "gaze_offset_ms = -12.5\n"
      "gap_frames=3\n"
      "keyframe_rule = new_object_only\n"
      "subject_pattern = ^(p[0-9]+)-\n"
      "adapter_cmd = python3 'my adapter.py' --model x\n"
      "colors = red=#ff0000, purple=#010203\n");
  CHECK(c.gaze_offset_ms == -12.5);
  CHECK(c.gap_frames == 3);
  CHECK(c.keyframe_rule == KeyframeRule::NewObjectOnly);
  CHECK(c.subject_pattern == "^(p[0-9]+)-");
  CHECK(c.adapter_cmd == std::vector<std::string>{"python3", "my adapter.py", "--model", "x"});
  CHECK(c.colors.red == Rgb{255, 0, 0});
  CHECK(c.colors.purple == Rgb{1, 2, 3});
  CHECK(c.colors.green == Rgb{0, 200, 0});
}

TEST_CASE("invalid configuration is rejected") {
  CHECK(code_of([] { parse_config("colour = red\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("gap_frames = -1\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("gap_frames = two\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("keyframe_rule = sometimes\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("subject_pattern = ^[a-z]+\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("subject_pattern = ([\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("adapter_cmd =\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("just text\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("colors = teal=#000000\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("colors = red=#zz0000\n"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("environment overrides the file") {
  support::TempDir dir;
  write_file_atomic(dir / "cfg", "gap_frames = 2\ngaze_offset_ms = 5\n");
  ::setenv("GAZE2AOI_GAP_FRAMES", "7", 1);
  auto c = load_config(dir / "cfg");
  ::unsetenv("GAZE2AOI_GAP_FRAMES");
  CHECK(c.gap_frames == 7);
  CHECK(c.gaze_offset_ms == 5.0);
  CHECK(load_config(std::nullopt).gap_frames == 0);
  CHECK(code_of([&] { load_config(dir / "missing"); }) == ErrorCode::FileUnreadable);
}

TEST_CASE("extract_subject uses the first capture group on the file name") {
  const std::string p = Config{}.subject_pattern;
  CHECK(extract_subject("/data/s01_video.mp4", p) == "s01");
  CHECK(extract_subject("s02_gaze.csv", p) == "s02");
  CHECK_FALSE(extract_subject("/data_dir/video.mp4", p).has_value());
}
