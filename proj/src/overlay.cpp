#include "gaze2aoi/overlay.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <system_error>
#include <tuple>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <unistd.h>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/process.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

std::filesystem::path scratch_file(std::string_view tag) {
  static std::atomic<int> counter{0};
  return std::filesystem::temp_directory_path() /
         ("gaze2aoi-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

std::string tail_of(const std::filesystem::path& p) {
  std::string s;
  try {
    s = read_file(p);
  } catch (const Error&) {
  }
  std::error_code ec;
  std::filesystem::remove(p, ec);
  if (s.size() > 2000) s.erase(0, s.size() - 2000);
  return s;
}

Subprocess spawn_media(const std::vector<std::string>& argv, const Subprocess::Options& opts, ErrorCode code) {
  try {
    return Subprocess(argv, opts);
  } catch (const std::system_error& e) {
    throw Error(code, "cannot start " + (argv.empty() ? std::string("<empty>") : argv.front()) + ": " + e.what());
  }
}

// Hershey fonts are ASCII only.
std::string ascii_only(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if ((c & 0xC0) == 0xC0) {
      out.push_back('-');  // lead byte of a multi-byte sequence
    }
  }
  return out;
}

}  // namespace

Rgb Palette::operator[](DrawColor c) const {
  switch (c) {
    case DrawColor::Green: return green;
    case DrawColor::Red: return red;
    case DrawColor::Purple: return purple;
  }
  return red;
}

std::string_view to_string(DrawColor color) {
  switch (color) {
    case DrawColor::Green: return "green";
    case DrawColor::Red: return "red";
    case DrawColor::Purple: return "purple";
  }
  return "red";
}

std::string make_caption(const std::string& class_name, const std::optional<std::string>& label) {
  if (!label) return class_name;
  return class_name + " — " + *label;
}

OverlayBuilder::OverlayBuilder(const std::vector<FrameAssociation>& associations, const DetectionSet& detections,
                               const GazeRecording& recording, const LabelStore& labels, const VideoMeta& meta)
    : detections_(detections), recording_(recording), labels_(labels), meta_(meta) {
  const auto n_frames = static_cast<std::size_t>(meta.frame_count);
  detection_range_.assign(n_frames, {0, 0});
  const auto& dets = detections.detections;
  for (std::size_t i = 0; i < dets.size();) {
    std::size_t j = i;
    while (j < dets.size() && dets[j].frame_no == dets[i].frame_no) ++j;
    if (dets[i].frame_no >= 0 && dets[i].frame_no < meta.frame_count) detection_range_[dets[i].frame_no] = {i, j};
    i = j;
  }

  auto by_key = [](const FrameAssociation& a, const FrameAssociation& b) {
    return std::tie(a.frame_no, a.track_id) < std::tie(b.frame_no, b.track_id);
  };
  const std::vector<FrameAssociation>* sorted = &associations;
  std::vector<FrameAssociation> copy;
  if (!std::is_sorted(associations.begin(), associations.end(), by_key)) {
    copy = associations;
    std::sort(copy.begin(), copy.end(), by_key);
    sorted = &copy;
  }
  fixated_.assign(dets.size(), false);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    FrameAssociation probe{dets[i].frame_no, dets[i].track_id};
    auto it = std::lower_bound(sorted->begin(), sorted->end(), probe, by_key);
    fixated_[i] = it != sorted->end() && it->frame_no == probe.frame_no && it->track_id == probe.track_id &&
                  it->fixated;
  }

  active_fixation_.assign(n_frames, std::nullopt);
  for (std::size_t f = 0; f < recording.fixations.size(); ++f) {
    auto span = fixation_frames(recording.fixations[f], meta);
    if (!span) continue;
    for (FrameNo n = span->first; n <= span->last; ++n) {
      auto& slot = active_fixation_[n];
      if (!slot || recording.fixations[f].start_ms > recording.fixations[*slot].start_ms) slot = f;
    }
  }
}

std::vector<DrawCommand> OverlayBuilder::build(FrameNo frame) const {
  if (frame < 0 || frame >= meta_.frame_count) {
    throw Error(ErrorCode::FrameOutOfRange, "frame " + std::to_string(frame) + " outside 0.." +
                                                std::to_string(meta_.frame_count - 1));
  }
  std::vector<DrawCommand> out;
  auto [b, e] = detection_range_[frame];
  for (auto i = b; i < e; ++i) {
    const auto& d = detections_.detections[i];
    DrawCommand cmd;
    cmd.kind = DrawKind::Box;
    cmd.color = fixated_[i] ? DrawColor::Green : DrawColor::Red;
    cmd.box = d.box;
    cmd.caption = make_caption(d.class_name, effective_label(labels_, d.track_id, frame));
    cmd.track_id = d.track_id;
    out.push_back(std::move(cmd));
  }
  if (auto f = active_fixation_[frame]) {
    const auto& fx = recording_.fixations[*f];
    DrawCommand dot;
    dot.kind = DrawKind::Dot;
    dot.color = DrawColor::Purple;
    dot.x = fx.cx_px;
    dot.y = fx.cy_px;
    dot.radius = kDotRadiusPx;
    out.push_back(std::move(dot));
  }
  return out;
}

std::vector<DrawCommand> build_overlay(FrameNo frame, const std::vector<FrameAssociation>& associations,
                                       const DetectionSet& detections, const GazeRecording& recording,
                                       const LabelStore& labels, const VideoMeta& meta) {
  return OverlayBuilder(associations, detections, recording, labels, meta).build(frame);
}

std::string write_overlay_json(const std::vector<DrawCommand>& commands, const Palette& palette) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : commands) {
    nlohmann::ordered_json j;
    auto rgb = palette[c.color];
    switch (c.kind) {
      case DrawKind::Box:
        j["kind"] = "box";
        j["color"] = to_string(c.color);
        j["rgb"] = {rgb.r, rgb.g, rgb.b};
        j["box"] = {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max};
        j["stroke"] = kBoxStrokePx;
        break;
      case DrawKind::Dot:
        j["kind"] = "dot";
        j["color"] = to_string(c.color);
        j["rgb"] = {rgb.r, rgb.g, rgb.b};
        j["center"] = {c.x, c.y};
        j["radius"] = c.radius;
        break;
      case DrawKind::Text:
        j["kind"] = "text";
        j["color"] = to_string(c.color);
        j["rgb"] = {rgb.r, rgb.g, rgb.b};
        j["anchor"] = {c.x, c.y};
        break;
    }
    if (c.track_id) j["track_id"] = *c.track_id;
    if (c.caption) j["caption"] = *c.caption;
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

void rasterize(std::span<std::uint8_t> rgb, int width, int height, const std::vector<DrawCommand>& commands,
               const Palette& palette) {
  if (rgb.size() < static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::DecoderFailed, "frame buffer smaller than width x height x 3");
  }
  cv::Mat frame(height, width, CV_8UC3, rgb.data());
  auto px = [](double v) { return static_cast<int>(std::lround(v)); };
  for (const auto& c : commands) {
    auto rgbc = palette[c.color];
    const cv::Scalar color(rgbc.r, rgbc.g, rgbc.b);  // buffer is RGB, not BGR
    switch (c.kind) {
      case DrawKind::Box: {
        cv::rectangle(frame, cv::Point(px(c.box.x_min), px(c.box.y_min)), cv::Point(px(c.box.x_max), px(c.box.y_max)),
                      color, kBoxStrokePx, cv::LINE_8);
        if (c.caption) {
          cv::putText(frame, ascii_only(*c.caption), cv::Point(px(c.box.x_min), std::max(px(c.box.y_min) - 4, 10)),
                      cv::FONT_HERSHEY_SIMPLEX, 0.4, color, 1, cv::LINE_8);
        }
        break;
      }
      case DrawKind::Dot:
        cv::circle(frame, cv::Point(px(c.x), px(c.y)), px(c.radius), color, cv::FILLED, cv::LINE_8);
        break;
      case DrawKind::Text:
        if (c.caption) {
          cv::putText(frame, ascii_only(*c.caption), cv::Point(px(c.x), px(c.y)), cv::FONT_HERSHEY_SIMPLEX, 0.4,
                      color, 1, cv::LINE_8);
        }
        break;
    }
  }
}

std::map<std::string, std::string> command_values(const std::string& input, const std::string& output,
                                                  const VideoMeta& meta) {
  return {{"input", input},
          {"output", output},
          {"width", std::to_string(meta.width_px)},
          {"height", std::to_string(meta.height_px)},
          {"fps", text::format_shortest(meta.fps)}};
}

std::int64_t render_annotated_video(const RenderRequest& req,
                                    const std::function<std::vector<DrawCommand>(FrameNo)>& overlay) {
  if (req.frame_stride < 1) throw Error(ErrorCode::Usage, "frame stride must be >= 1");
  VideoMeta out_meta = req.meta;
  out_meta.fps = req.meta.fps / static_cast<double>(req.frame_stride);

  const auto dec_err = scratch_file("decoder");
  const auto enc_err = scratch_file("encoder");
  Subprocess::Options dec_opts;
  dec_opts.out = Subprocess::Stream::pipe();
  dec_opts.err = Subprocess::Stream::to_file(dec_err);
  auto decoder = spawn_media(expand_command(req.decoder_cmd, command_values(req.video_path, "-", req.meta)),
                             dec_opts, ErrorCode::DecoderFailed);

  Subprocess::Options enc_opts;
  enc_opts.in = Subprocess::Stream::pipe();
  enc_opts.out = Subprocess::Stream::null();
  enc_opts.err = Subprocess::Stream::to_file(enc_err);
  auto encoder = spawn_media(expand_command(req.encoder_cmd, command_values("-", req.output_path, out_meta)),
                             enc_opts, ErrorCode::EncoderFailed);

  const auto frame_bytes = static_cast<std::size_t>(req.meta.width_px * req.meta.height_px * 3);
  std::vector<std::uint8_t> buffer(frame_bytes);
  std::int64_t written = 0;
  bool encoder_gone = false;
  for (FrameNo decoded = 0;; ++decoded) {
    auto got = decoder.read_exact(reinterpret_cast<char*>(buffer.data()), frame_bytes);
    if (got == 0) break;
    if (got != frame_bytes) {
      throw Error(ErrorCode::DecoderFailed, "decoder produced a truncated frame at " + std::to_string(decoded));
    }
    if (decoded % req.frame_stride != 0) continue;
    const FrameNo frame = decoded / req.frame_stride;
    if (req.frames && !req.frames->contains(frame)) continue;
    if (frame < out_meta.frame_count || !req.frames) {
      if (frame < req.meta.frame_count) {
        rasterize(buffer, static_cast<int>(req.meta.width_px), static_cast<int>(req.meta.height_px), overlay(frame),
                  req.palette);
      }
    }
    if (!encoder.write_all({reinterpret_cast<const char*>(buffer.data()), buffer.size()})) {
      encoder_gone = true;
      break;
    }
    ++written;
  }
  encoder.close_stdin();
  int enc_rc = encoder.wait();
  decoder.close_stdin();
  int dec_rc = encoder_gone ? 0 : decoder.wait();
  if (dec_rc != 0) throw Error(ErrorCode::DecoderFailed, "decoder exited " + std::to_string(dec_rc) + ": " + tail_of(dec_err));
  if (enc_rc != 0 || encoder_gone) {
    throw Error(ErrorCode::EncoderFailed, "encoder exited " + std::to_string(enc_rc) + ": " + tail_of(enc_err));
  }
  tail_of(dec_err);
  tail_of(enc_err);
  return written;
}

std::vector<std::uint8_t> decode_frame(const std::string& video_path, const VideoMeta& meta,
                                       const std::vector<std::string>& decoder_cmd, FrameNo frame) {
  if (frame < 0 || frame >= meta.frame_count) {
    throw Error(ErrorCode::FrameOutOfRange, "frame " + std::to_string(frame) + " out of range");
  }
  const auto err = scratch_file("decoder");
  Subprocess::Options opts;
  opts.out = Subprocess::Stream::pipe();
  opts.err = Subprocess::Stream::to_file(err);
  auto decoder = spawn_media(expand_command(decoder_cmd, command_values(video_path, "-", meta)), opts,
                             ErrorCode::DecoderFailed);
  const auto frame_bytes = static_cast<std::size_t>(meta.width_px * meta.height_px * 3);
  std::vector<std::uint8_t> buffer(frame_bytes);
  for (FrameNo n = 0; n <= frame; ++n) {
    if (decoder.read_exact(reinterpret_cast<char*>(buffer.data()), frame_bytes) != frame_bytes) {
      decoder.wait();
      throw Error(ErrorCode::DecoderFailed, "decoder ended before frame " + std::to_string(frame) + ": " + tail_of(err));
    }
  }
  tail_of(err);
  return buffer;  // the decoder is killed on scope exit
}

std::string encode_png(std::span<const std::uint8_t> rgb, int width, int height) {
  cv::Mat frame(height, width, CV_8UC3, const_cast<std::uint8_t*>(rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(frame, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> png;
  cv::imencode(".png", bgr, png);
  return {png.begin(), png.end()};
}

}  // namespace gaze2aoi
