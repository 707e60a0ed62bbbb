#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gaze2aoi {

using FrameNo = std::int64_t;
using FixationId = std::int64_t;

struct GazeSample {
  double timestamp_ms = 0.0;
  // Absent when the tracker exported a blank cell. Ignored when !valid.
  std::optional<double> x_px;
  std::optional<double> y_px;
  bool valid = false;
  std::optional<FixationId> fixation_id;

  bool operator==(const GazeSample&) const = default;
};

struct Fixation {
  FixationId fixation_id = 0;
  double start_ms = 0.0;
  double duration_ms = 0.0;
  double cx_px = 0.0;
  double cy_px = 0.0;

  double end_ms() const { return start_ms + duration_ms; }
  bool operator==(const Fixation&) const = default;
};

struct GazeRecording {
  std::string subject_id;
  std::vector<GazeSample> samples;
  std::vector<Fixation> fixations;
  double sample_rate_hz = 0.0;

  bool operator==(const GazeRecording&) const = default;
};

struct VideoMeta {
  double fps = 25.0;
  std::int64_t width_px = 1;
  std::int64_t height_px = 1;
  std::int64_t frame_count = 1;
  std::optional<std::string> subject_id;

  double duration_ms() const;
  bool operator==(const VideoMeta&) const = default;
};

inline constexpr std::string_view kGazeCsvHeader =
    "timestamp_ms,gaze_x,gaze_y,validity,fixation_id";

/// Parses the canonical gaze CSV. `declared_rate_hz` is used when the
/// recording has fewer than two samples and the rate cannot be inferred.
GazeRecording parse_gaze_csv(std::string_view bytes, std::string subject_id,
                             std::optional<double> declared_rate_hz = std::nullopt);

/// Shortest round-trip formatting; parse_gaze_csv(write_gaze_csv(r)) == r
/// on samples.
std::string write_gaze_csv(const GazeRecording& recording);

struct DeriveResult {
  GazeRecording recording;
  std::vector<std::string> warnings;
};

/// Groups tagged samples into fixation events. A fixation whose samples are
/// all invalid is dropped with a warning and its tags are cleared.
DeriveResult derive_fixations(GazeRecording recording);

/// Shifts every timestamp by `offset_ms`; samples that land before video
/// start are dropped.
GazeRecording apply_offset(GazeRecording recording, double offset_ms);

/// Start of frame n's window in milliseconds.
double frame_start_ms(FrameNo n, double fps);

/// The frame whose half-open window [n/fps, (n+1)/fps) contains t_ms.
FrameNo time_to_frame(double t_ms, double fps);

std::set<FrameNo> frames_with_gaze(const GazeRecording& recording, const VideoMeta& meta);

struct Downsampled {
  GazeRecording recording;
  VideoMeta meta;
};

Downsampled downsample(const GazeRecording& recording, const VideoMeta& meta, std::int64_t factor);

VideoMeta parse_video_meta_json(std::string_view bytes);
std::string write_video_meta_json(const VideoMeta& meta);

}  // namespace gaze2aoi
