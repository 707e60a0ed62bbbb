#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/det_io.hpp"

namespace gaze2aoi {

/// Sorted multiset of class names detected in one frame.
using FrameSignature = std::vector<std::string>;

struct KeyFrame {
  FrameNo frame_no = 0;
  FrameSignature signature;
  std::set<TrackId> track_ids;

  bool operator==(const KeyFrame&) const = default;
};

enum class KeyframeRule {
  SignatureChange,  // any change in the class multiset
  NewObjectOnly,    // only when some class count grows
};

std::optional<KeyframeRule> parse_keyframe_rule(std::string_view name);
std::string_view to_string(KeyframeRule rule);

/// Review frames in frame order. Frames without detections are never
/// selected, and each candidate is compared with the most recent key-frame
/// rather than with the previous frame.
std::vector<KeyFrame> extract_keyframes(const DetectionSet& detections,
                                        KeyframeRule rule = KeyframeRule::SignatureChange);

/// The latest key-frame at or before `frame`.
const KeyFrame& keyframe_for(FrameNo frame, const std::vector<KeyFrame>& keyframes);

bool is_keyframe(FrameNo frame, const std::vector<KeyFrame>& keyframes);

/// `[{"frame": n, "classes": [...], "track_ids": [...]}, ...]`
std::string write_keyframes_json(const std::vector<KeyFrame>& keyframes);

}  // namespace gaze2aoi
