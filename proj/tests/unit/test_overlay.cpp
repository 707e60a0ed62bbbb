#include <doctest.h>

#include <json.hpp>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/overlay.hpp"
#include "support.hpp"

using namespace gaze2aoi;

namespace {

struct Scene {
  VideoMeta meta{25, 64, 48, 10};
  DetectionSet set;
  GazeRecording rec;
  LabelStore labels;
  std::vector<FrameAssociation> rows;

  Scene() {
    for (FrameNo n = 0; n < 10; ++n) {
      set.detections.push_back({n, 1, 1, "Human face", {10, 10, 30, 30}, 0.9});
      set.detections.push_back({n, 2, 0, "Car", {40, 10, 60, 30}, 0.9});
    }
    // frames 2..4 fixate track 1
    rec.fixations = {{1, 80, 120, 20, 20}};
    labels = put_label(labels, {{1, 2}, {0}}, 1, 0, "Oven", std::nullopt, "t");
    rows = associate_frames(rec, set, meta);
  }

  std::vector<DrawCommand> at(FrameNo n) const { return build_overlay(n, rows, set, rec, labels, meta); }
};

std::array<std::uint8_t, 3> pixel(const std::vector<std::uint8_t>& buf, int width, int x, int y) {
  auto* p = &buf[(static_cast<std::size_t>(y) * width + x) * 3];
  return {p[0], p[1], p[2]};
}

}  // namespace

TEST_CASE("captions") {
  CHECK(make_caption("Human face", std::nullopt) == "Human face");
  CHECK(make_caption("Human face", "Oven") == "Human face — Oven");
}

TEST_CASE("boxes are green exactly when fixated, with a dot on the fixation") {
  Scene s;
  auto idle = s.at(0);
  REQUIRE(idle.size() == 2);
  for (const auto& c : idle) {
    CHECK(c.kind == DrawKind::Box);
    CHECK(c.color == DrawColor::Red);
  }
  CHECK(idle[0].caption == "Human face — Oven");
  CHECK(idle[1].caption == "Car");

  auto busy = s.at(3);
  REQUIRE(busy.size() == 3);
  CHECK(busy[0].track_id == 1);
  CHECK(busy[0].color == DrawColor::Green);
  CHECK(busy[1].color == DrawColor::Red);
  CHECK(busy[2].kind == DrawKind::Dot);
  CHECK(busy[2].color == DrawColor::Purple);
  CHECK(busy[2].x == 20);
  CHECK(busy[2].radius == kDotRadiusPx);

  CHECK_THROWS_AS(s.at(10), Error);
  CHECK_THROWS_AS(s.at(-1), Error);
}

TEST_CASE("box colour matches the fixated flag on every frame") {
  Scene s;
  OverlayBuilder builder(s.rows, s.set, s.rec, s.labels, s.meta);
  for (FrameNo n = 0; n < s.meta.frame_count; ++n) {
    auto cmds = builder.build(n);
    CHECK(cmds == s.at(n));
    for (const auto& c : cmds) {
      if (c.kind != DrawKind::Box) continue;
      auto row = std::find_if(s.rows.begin(), s.rows.end(),
                              [&](const FrameAssociation& r) { return r.frame_no == n && r.track_id == *c.track_id; });
      REQUIRE(row != s.rows.end());
      CHECK((c.color == DrawColor::Green) == row->fixated);
    }
  }
}

TEST_CASE("overlay JSON") {
  Scene s;
  auto j = nlohmann::json::parse(write_overlay_json(s.at(3)));
  REQUIRE(j.size() == 3);
  CHECK(j[0]["kind"] == "box");
  CHECK(j[0]["color"] == "green");
  CHECK(j[0]["rgb"] == nlohmann::json::array({0, 200, 0}));
  CHECK(j[0]["box"] == nlohmann::json::array({10, 10, 30, 30}));
  CHECK(j[0]["track_id"] == 1);
  CHECK(j[0]["caption"] == "Human face — Oven");
  CHECK(j[2]["kind"] == "dot");
  CHECK(j[2]["rgb"] == nlohmann::json::array({160, 32, 240}));
  CHECK(j[2]["center"] == nlohmann::json::array({20, 20}));
}

TEST_CASE("rasterize paints palette colours in RGB order") {
  Scene s;
  std::vector<std::uint8_t> buf(64 * 48 * 3, 0);
  rasterize(buf, 64, 48, s.at(3));
  auto green = pixel(buf, 64, 10, 20);
  CHECK((green == std::array<std::uint8_t, 3>{0, 200, 0}));
  CHECK((pixel(buf, 64, 40, 20) == std::array<std::uint8_t, 3>{220, 0, 0}));
  CHECK((pixel(buf, 64, 20, 20) == std::array<std::uint8_t, 3>{160, 32, 240}));
  CHECK((pixel(buf, 64, 2, 45) == std::array<std::uint8_t, 3>{0, 0, 0}));

  Palette custom;
  custom.red = {1, 2, 3};
  rasterize(buf, 64, 48, s.at(0), custom);
  CHECK((pixel(buf, 64, 40, 20) == std::array<std::uint8_t, 3>{1, 2, 3}));

  std::vector<std::uint8_t> small(10);
  CHECK_THROWS_AS(rasterize(small, 64, 48, {}), Error);
}

TEST_CASE("encode_png produces a PNG") {
  std::vector<std::uint8_t> buf(8 * 4 * 3, 128);
  auto png = encode_png(buf, 8, 4);
  REQUIRE(png.size() > 8);
  CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("command placeholders") {
  auto v = command_values("in.mp4", "out.mp4", {29.97, 640, 480, 1});
  CHECK(v["width"] == "640");
  CHECK(v["height"] == "480");
  CHECK(v["fps"] == "29.97");
  CHECK(v["input"] == "in.mp4");
}

namespace {

struct RawClip {
  support::TempDir dir;
  std::string video;
  VideoMeta meta{25, 64, 48, 10};
  Config config = support::test_config();
  RawClip() {
    video = (dir / "clip.rgb").string();
    auto r = support::run({support::tool("gaze2aoi-rawvideo").string(), "generate", "--out", video, "--width", "64",
                           "--height", "48", "--frames", "10"});
    REQUIRE(r.status == 0);
  }
  RenderRequest request(const std::string& out) const {
    RenderRequest req;
    req.video_path = video;
    req.output_path = out;
    req.meta = meta;
    req.decoder_cmd = config.decoder_cmd;
    req.encoder_cmd = config.encoder_cmd;
    return req;
  }
};

}  // namespace

TEST_CASE("render_annotated_video pipes every frame through the overlay") {
  RawClip clip;
  Scene s;
  auto out = (clip.dir / "out.rgb").string();
  CHECK(render_annotated_video(clip.request(out), [&](FrameNo n) { return s.at(n); }) == 10);
  auto bytes = read_file(out);
  REQUIRE(bytes.size() == 10u * 64 * 48 * 3);

  std::vector<std::uint8_t> frame3(bytes.begin() + 3 * 64 * 48 * 3, bytes.begin() + 4 * 64 * 48 * 3);
  CHECK((pixel(frame3, 64, 10, 20) == std::array<std::uint8_t, 3>{0, 200, 0}));
  std::vector<std::uint8_t> frame0(bytes.begin(), bytes.begin() + 64 * 48 * 3);
  CHECK((pixel(frame0, 64, 10, 20) == std::array<std::uint8_t, 3>{220, 0, 0}));

  auto decoded = decode_frame(clip.video, clip.meta, clip.config.decoder_cmd, 3);
  CHECK(decoded.size() == 64u * 48 * 3);
  CHECK(decoded[0] == 3);  // generator pattern: red = (x + n) % 64
  CHECK_THROWS_AS(decode_frame(clip.video, clip.meta, clip.config.decoder_cmd, 10), Error);
}

TEST_CASE("render honours stride and frame subsets") {
  RawClip clip;
  auto out = (clip.dir / "out.rgb").string();
  auto req = clip.request(out);
  req.frame_stride = 3;
  req.meta.frame_count = 10;
  std::vector<FrameNo> seen;
  auto n = render_annotated_video(req, [&](FrameNo f) {
    seen.push_back(f);
    return std::vector<DrawCommand>{};
  });
  CHECK(n == 4);
  CHECK(seen == std::vector<FrameNo>{0, 1, 2, 3});
  auto bytes = read_file(out);
  CHECK(static_cast<unsigned char>(bytes[64 * 48 * 3]) == 3);  // output frame 1 is decoded frame 3

  req.frame_stride = 1;
  req.frames = std::set<FrameNo>{2, 5};
  CHECK(render_annotated_video(req, [](FrameNo) { return std::vector<DrawCommand>{}; }) == 2);
}

TEST_CASE("decoder and encoder failures are reported") {
  RawClip clip;
  auto req = clip.request((clip.dir / "out.rgb").string());
  auto none = [](FrameNo) { return std::vector<DrawCommand>{}; };

  auto bad_input = req;
  bad_input.video_path = (clip.dir / "missing.rgb").string();
  try {
    render_annotated_video(bad_input, none);
    FAIL("expected DecoderFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecoderFailed);
  }

  auto truncated = req;
  write_file_atomic(clip.dir / "short.rgb", std::string(100, 'x'));
  truncated.video_path = (clip.dir / "short.rgb").string();
  try {
    render_annotated_video(truncated, none);
    FAIL("expected DecoderFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecoderFailed);
  }

  auto bad_output = req;
  bad_output.output_path = "/nonexistent-dir/out.rgb";
  try {
    render_annotated_video(bad_output, none);
    FAIL("expected EncoderFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EncoderFailed);
  }

  auto no_encoder = req;
  no_encoder.encoder_cmd = {"/nonexistent/encoder"};
  try {
    render_annotated_video(no_encoder, none);
    FAIL("expected EncoderFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EncoderFailed);
  }
}
