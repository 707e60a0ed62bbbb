#include <doctest.h>

#include <cmath>
#include <random>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/gaze_io.hpp"
#include "support.hpp"

using namespace gaze2aoi;

namespace {

const std::string kHeader = "timestamp_ms,gaze_x,gaze_y,validity,fixation_id\n";

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Usage;
}

GazeSample gs(double t, double x, double y, std::optional<FixationId> id = std::nullopt, bool valid = true) {
  return {t, x, y, valid, id};
}

}  // namespace

TEST_CASE("parse_gaze_csv reads the canonical schema") {
  auto rec = parse_gaze_csv(kHeader + "0,10.5,20,1,1\n20,,,0,\n40,11,21.25,1,\n", "s01");
  REQUIRE(rec.samples.size() == 3);
  CHECK(rec.subject_id == "s01");
  CHECK(rec.samples[0] == gs(0, 10.5, 20, 1));
  CHECK(rec.samples[1].valid == false);
  CHECK_FALSE(rec.samples[1].x_px.has_value());
  CHECK_FALSE(rec.samples[1].fixation_id.has_value());
  CHECK(rec.samples[2].y_px == 21.25);
  CHECK(rec.sample_rate_hz == doctest::Approx(50.0));
}

TEST_CASE("parse_gaze_csv tolerates CRLF and a byte-order mark") {
  auto rec = parse_gaze_csv("\xEF\xBB\xBF" "timestamp_ms,gaze_x,gaze_y,validity,fixation_id\r\n0,1,2,1,\r\n10,1,2,1,\r\n", "");
  CHECK(rec.samples.size() == 2);
  CHECK(rec.sample_rate_hz == doctest::Approx(100.0));
}

TEST_CASE("parse_gaze_csv rejects malformed input") {
  CHECK(code_of([] { parse_gaze_csv("t,x,y,v,f\n0,1,2,1,\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "0,1,2,1\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "0,1,2,2,\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "0,,2,1,\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "x,1,2,1,\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "-1,1,2,1,\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "0,1,2,1,a\n", ""); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "10,1,2,1,\n10,1,2,1,\n", ""); }) == ErrorCode::NonMonotoneTimestamp);
  CHECK(code_of([] { parse_gaze_csv(kHeader + "10,1,2,1,\n5,1,2,1,\n", ""); }) == ErrorCode::NonMonotoneTimestamp);
  CHECK(code_of([] { parse_gaze_csv(kHeader, ""); }) == ErrorCode::EmptyRecording);
  CHECK(code_of([] { parse_gaze_csv("", ""); }) == ErrorCode::MalformedRow);
}

TEST_CASE("sample rate is the median inter-sample rate; one sample needs a declared rate") {
  // gaps 10, 10, 40 ms
  auto rec = parse_gaze_csv(kHeader + "0,1,1,1,\n10,1,1,1,\n20,1,1,1,\n60,1,1,1,\n", "");
  CHECK(rec.sample_rate_hz == doctest::Approx(100.0));
  CHECK(code_of([] { parse_gaze_csv(kHeader + "0,1,1,1,\n", ""); }) == ErrorCode::UnknownSampleRate);
  CHECK(parse_gaze_csv(kHeader + "0,1,1,1,\n", "", 60.0).sample_rate_hz == 60.0);
}

TEST_CASE("derive_fixations: extent and centroid") {
  GazeRecording rec;
  rec.sample_rate_hz = 100.0;  // 10 ms period
  rec.samples = {gs(0, 10, 10, 1), gs(10, 20, 20, 1)};
  auto out = derive_fixations(rec);
  REQUIRE(out.recording.fixations.size() == 1);
  CHECK(out.recording.fixations[0] == Fixation{1, 0.0, 20.0, 15.0, 15.0});
  CHECK(out.warnings.empty());
}

TEST_CASE("derive_fixations: untagged recordings and interleaving") {
  GazeRecording rec;
  rec.sample_rate_hz = 100.0;
  rec.samples = {gs(0, 1, 1), gs(10, 1, 1)};
  CHECK(derive_fixations(rec).recording.fixations.empty());

  rec.samples = {gs(0, 1, 1, 1), gs(10, 1, 1, 2), gs(20, 1, 1, 1)};
  CHECK(code_of([&] { derive_fixations(rec); }) == ErrorCode::InterleavedFixation);

  // Untagged samples inside a run do not split it.
  rec.samples = {gs(0, 0, 0, 1), gs(10, 5, 5), gs(20, 10, 10, 1)};
  auto out = derive_fixations(rec).recording;
  REQUIRE(out.fixations.size() == 1);
  CHECK(out.fixations[0].duration_ms == doctest::Approx(30.0));
  CHECK(out.fixations[0].cx_px == doctest::Approx(5.0));
}

TEST_CASE("derive_fixations: invalid samples are excluded from the centroid; all-invalid runs are dropped") {
  GazeRecording rec;
  rec.sample_rate_hz = 100.0;
  rec.samples = {gs(0, 10, 10, 1), gs(10, 99, 99, 1, false), gs(20, 20, 20, 1),
                 gs(30, 1, 1, 2, false), gs(40, 1, 1, 2, false)};
  auto out = derive_fixations(rec);
  REQUIRE(out.recording.fixations.size() == 1);
  CHECK(out.recording.fixations[0].cx_px == doctest::Approx(15.0));
  CHECK(out.recording.fixations[0].duration_ms == doctest::Approx(30.0));
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0].rfind("FixationWithNoValidSamples", 0) == 0);
  CHECK_FALSE(out.recording.samples[3].fixation_id.has_value());
}

TEST_CASE("time_to_frame examples and boundaries") {
  CHECK(time_to_frame(0, 25) == 0);
  CHECK(time_to_frame(1000, 25) == 25);
  CHECK(time_to_frame(39.9, 25) == 0);
  CHECK(time_to_frame(40, 25) == 1);
  CHECK(time_to_frame(frame_start_ms(7, 29.97), 29.97) == 7);
}

TEST_CASE("time_to_frame maps every t in a frame window to that frame") {
  std::mt19937_64 rng(7);
  const double fps_values[] = {25.0, 30.0, 29.97, 24.0, 59.94, 12.5, 60.0};
  for (int i = 0; i < 20000; ++i) {
    const double fps = fps_values[rng() % 7];
    const FrameNo n = static_cast<FrameNo>(rng() % 100000);
    const double lo = frame_start_ms(n, fps);
    const double hi = frame_start_ms(n + 1, fps);
    const double t = lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (t >= hi) continue;
    REQUIRE(time_to_frame(t, fps) == n);
    REQUIRE(time_to_frame(lo, fps) == n);
  }
}

TEST_CASE("time_to_frame is monotone") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    double a = std::uniform_real_distribution<double>(0, 1e6)(rng);
    double b = std::uniform_real_distribution<double>(0, 1e6)(rng);
    if (a > b) std::swap(a, b);
    REQUIRE(time_to_frame(a, 29.97) <= time_to_frame(b, 29.97));
  }
}

TEST_CASE("frames_with_gaze") {
  VideoMeta meta{25, 10, 10, 100};
  GazeRecording rec;
  for (int t = 0; t < 1000; t += 4) rec.samples.push_back(gs(t, 1, 1));
  auto frames = frames_with_gaze(rec, meta);
  REQUIRE(frames.size() == 25);
  CHECK(*frames.begin() == 0);
  CHECK(*frames.rbegin() == 24);

  GazeRecording invalid;
  invalid.samples = {gs(0, 1, 1, std::nullopt, false)};
  CHECK(frames_with_gaze(invalid, meta).empty());

  GazeRecording boundary;
  boundary.samples = {gs(1000, 1, 1)};
  CHECK(frames_with_gaze(boundary, meta) == std::set<FrameNo>{25});

  GazeRecording late;
  late.samples = {gs(999999, 1, 1)};
  CHECK(frames_with_gaze(late, meta).empty());
}

TEST_CASE("downsample") {
  VideoMeta meta{30, 10, 10, 101};
  GazeRecording rec;
  rec.samples = {gs(0, 1, 1), gs(100, 1, 1)};
  auto one = downsample(rec, meta, 1);
  CHECK(one.meta == meta);
  CHECK(one.recording == rec);

  auto two = downsample(rec, meta, 2);
  CHECK(two.meta.fps == 15.0);
  CHECK(two.meta.frame_count == 51);
  CHECK(two.recording == rec);

  auto huge = downsample(rec, meta, 1000);
  CHECK(huge.meta.frame_count == 1);
  CHECK(frames_with_gaze(huge.recording, huge.meta) == std::set<FrameNo>{0});
  CHECK(code_of([&] { downsample(rec, meta, 0); }) == ErrorCode::Usage);
}

TEST_CASE("frames_with_gaze after downsampling equals the floored original frames") {
  std::mt19937_64 rng(3);
  const double fps_values[] = {25.0, 30.0, 29.97, 24.0, 60.0};
  for (int round = 0; round < 300; ++round) {
    VideoMeta meta{fps_values[rng() % 5], 10, 10, static_cast<std::int64_t>(1 + rng() % 500)};
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 6);
    GazeRecording rec;
    double t = 0;
    for (int i = 0; i < 200; ++i) {
      if (rng() % 4 == 0) {
        // Straddle a coarse boundary: one ulp either side of a fine window start.
        const double edge = frame_start_ms(static_cast<FrameNo>(t * meta.fps / 1000.0) + 1 + static_cast<FrameNo>(rng() % 4), meta.fps);
        t = rng() % 2 ? std::nextafter(edge, 0.0) : edge;
      } else {
        t += (rng() % 3 == 0) ? frame_start_ms(1, meta.fps) : std::uniform_real_distribution<double>(0.1, 90)(rng);
      }
      rec.samples.push_back(gs(t, 1, 1, std::nullopt, rng() % 5 != 0));
    }
    std::set<FrameNo> expected;
    for (auto n : frames_with_gaze(rec, meta)) expected.insert(n / k);
    auto ds = downsample(rec, meta, k);
    REQUIRE(frames_with_gaze(ds.recording, ds.meta) == expected);
  }
}

TEST_CASE("apply_offset shifts and drops samples before video start") {
  GazeRecording rec;
  rec.sample_rate_hz = 100;
  rec.samples = {gs(0, 1, 1, 1), gs(10, 1, 1, 1), gs(50, 2, 2, 2), gs(60, 2, 2, 2)};
  rec = derive_fixations(rec).recording;
  auto shifted = apply_offset(rec, -5);
  REQUIRE(shifted.samples.size() == 3);
  CHECK(shifted.samples[0].timestamp_ms == 5);
  // fixation 1 now starts before zero and is dropped with its tags
  REQUIRE(shifted.fixations.size() == 1);
  CHECK(shifted.fixations[0].fixation_id == 2);
  CHECK(shifted.fixations[0].start_ms == 45);
  CHECK_FALSE(shifted.samples[0].fixation_id.has_value());
  CHECK(apply_offset(rec, 0) == rec);
}

TEST_CASE("gaze CSV round-trips bit-exactly") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    GazeRecording rec;
    rec.subject_id = "s";
    double t = std::uniform_real_distribution<double>(0, 5)(rng);
    FixationId id = 0;
    const int n = 2 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      GazeSample s;
      s.timestamp_ms = t;
      t += std::uniform_real_distribution<double>(0.001, 40)(rng);
      s.valid = rng() % 4 != 0;
      if (s.valid || rng() % 2) {
        s.x_px = std::uniform_real_distribution<double>(-50, 2000)(rng);
        s.y_px = std::uniform_real_distribution<double>(-50, 2000)(rng);
      }
      if (rng() % 3) {
        if (rng() % 5 == 0) ++id;
        s.fixation_id = id;
      }
      rec.samples.push_back(s);
    }
    auto bytes = write_gaze_csv(rec);
    auto back = parse_gaze_csv(bytes, "s");
    REQUIRE(back.samples == rec.samples);
    REQUIRE(write_gaze_csv(back) == bytes);
  }
}

TEST_CASE("video meta JSON round-trips") {
  VideoMeta meta{29.97, 1920, 1080, 4500, std::string("s07")};
  CHECK(parse_video_meta_json(write_video_meta_json(meta)) == meta);
  CHECK(meta.duration_ms() == doctest::Approx(4500 * 1000.0 / 29.97));
  CHECK(code_of([] { parse_video_meta_json("{\"fps\": 25}"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_video_meta_json("[1]"); }) == ErrorCode::ParseError);
}

TEST_CASE("bundled gaze fixture parses and derives eight fixations") {
  auto rec = parse_gaze_csv(read_file(support::fixture("s01_gaze.csv")), "s01");
  CHECK(rec.sample_rate_hz == doctest::Approx(50.0));
  auto out = derive_fixations(rec);
  CHECK(out.recording.fixations.size() == 8);
  CHECK(out.warnings.empty());
}
