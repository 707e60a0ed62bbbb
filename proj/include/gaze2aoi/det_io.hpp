#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/gaze_io.hpp"

namespace gaze2aoi {

using TrackId = std::int64_t;
using ClassId = std::int64_t;

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool operator==(const Box&) const = default;
};

struct Detection {
  FrameNo frame_no = 0;
  TrackId track_id = 0;
  ClassId class_id = 0;
  std::string class_name;
  Box box;
  double confidence = 0.0;

  bool operator==(const Detection&) const = default;
};

struct ClassManifest {
  struct Entry {
    ClassId class_id = 0;
    std::string class_name;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  std::string source;

  const Entry* find(ClassId id) const;
  const Entry* find(std::string_view name) const;
  /// Entries ordered by name for presentation; storage order is untouched.
  std::vector<Entry> alphabetical() const;
};

struct DetectionSet {
  std::optional<VideoMeta> video_meta;
  std::vector<Detection> detections;  // sorted by (frame_no, track_id)
  std::set<ClassId> class_filter;

  bool operator==(const DetectionSet& o) const { return detections == o.detections; }
};

inline constexpr std::string_view kDetectionsCsvHeader =
    "frame,track_id,class_id,class_name,x_min,y_min,x_max,y_max,confidence";
inline constexpr std::string_view kClassManifestHeader = "class_id,class_name";

DetectionSet parse_detections_csv(std::string_view bytes);

/// Canonical form: sorted rows, coordinates rounded to 2 decimals with
/// trailing zeros trimmed, confidence fixed at 4 decimals, ties to even.
std::string write_detections_csv(const DetectionSet& set);

/// Rounds every value to what write_detections_csv would emit.
DetectionSet canonicalize(DetectionSet set);

ClassManifest parse_class_manifest(std::string_view bytes, std::string source = {});
std::string write_class_manifest(const ClassManifest& manifest);

std::set<TrackId> track_ids(const DetectionSet& set);

/// Keeps only detections whose frame is in `frames`.
DetectionSet restrict_to_frames(const DetectionSet& set, const std::set<FrameNo>& frames);

}  // namespace gaze2aoi
