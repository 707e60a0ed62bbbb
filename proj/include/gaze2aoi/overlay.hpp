#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gaze2aoi/associate.hpp"
#include "gaze2aoi/labels.hpp"

namespace gaze2aoi {

enum class DrawKind { Box, Dot, Text };
enum class DrawColor { Green, Red, Purple };

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Palette {
  Rgb green{0, 200, 0};
  Rgb red{220, 0, 0};
  Rgb purple{160, 32, 240};

  Rgb operator[](DrawColor c) const;
};

inline constexpr int kBoxStrokePx = 2;
inline constexpr int kDotRadiusPx = 6;

struct DrawCommand {
  DrawKind kind = DrawKind::Box;
  DrawColor color = DrawColor::Red;
  Box box;                 // Box
  double x = 0.0;          // Dot centre / Text anchor
  double y = 0.0;
  double radius = 0.0;     // Dot
  std::optional<std::string> caption;
  std::optional<TrackId> track_id;

  bool operator==(const DrawCommand&) const = default;
};

/// `class_name` or `class_name — label`.
std::string make_caption(const std::string& class_name, const std::optional<std::string>& label);

/// Precomputed per-frame lookups; build() is then O(detections in frame).
class OverlayBuilder {
 public:
  OverlayBuilder(const std::vector<FrameAssociation>& associations, const DetectionSet& detections,
                 const GazeRecording& recording, const LabelStore& labels, const VideoMeta& meta);

  std::vector<DrawCommand> build(FrameNo frame) const;

 private:
  const DetectionSet& detections_;
  const GazeRecording& recording_;
  const LabelStore& labels_;
  VideoMeta meta_;
  std::vector<std::pair<std::size_t, std::size_t>> detection_range_;  // per frame
  std::vector<bool> fixated_;                                         // per detection
  std::vector<std::optional<std::size_t>> active_fixation_;           // per frame
};

std::vector<DrawCommand> build_overlay(FrameNo frame, const std::vector<FrameAssociation>& associations,
                                       const DetectionSet& detections, const GazeRecording& recording,
                                       const LabelStore& labels, const VideoMeta& meta);

std::string write_overlay_json(const std::vector<DrawCommand>& commands, const Palette& palette = {});

std::string_view to_string(DrawColor color);

/// Draws onto a packed 8-bit RGB, row-major frame in place.
void rasterize(std::span<std::uint8_t> rgb, int width, int height, const std::vector<DrawCommand>& commands,
               const Palette& palette = {});

struct RenderRequest {
  std::string video_path;
  std::string output_path;
  VideoMeta meta;  // geometry and fps of the decoded stream
  std::vector<std::string> decoder_cmd;
  std::vector<std::string> encoder_cmd;
  /// Keep every stride-th decoded frame; output frame i is decoded frame
  /// i * stride.
  std::int64_t frame_stride = 1;
  /// When set, only these output frames are encoded.
  std::optional<std::set<FrameNo>> frames;
  Palette palette;
};

/// Decoder stdout -> rasterize -> encoder stdin. Returns frames written.
std::int64_t render_annotated_video(const RenderRequest& request,
                                    const std::function<std::vector<DrawCommand>(FrameNo)>& overlay);

/// Decodes a single frame (RGB) through the decoder command.
std::vector<std::uint8_t> decode_frame(const std::string& video_path, const VideoMeta& meta,
                                       const std::vector<std::string>& decoder_cmd, FrameNo frame);

std::string encode_png(std::span<const std::uint8_t> rgb, int width, int height);

/// Placeholder values for decoder and encoder templates.
std::map<std::string, std::string> command_values(const std::string& input, const std::string& output,
                                                  const VideoMeta& meta);

}  // namespace gaze2aoi
