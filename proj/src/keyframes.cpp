#include "gaze2aoi/keyframes.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "gaze2aoi/error.hpp"

namespace gaze2aoi {

namespace {

// True when `next` holds some class more often than `last`.
bool adds_object(const FrameSignature& last, const FrameSignature& next) {
  return !std::includes(last.begin(), last.end(), next.begin(), next.end());
}

}  // namespace

std::optional<KeyframeRule> parse_keyframe_rule(std::string_view name) {
  if (name == "signature_change") return KeyframeRule::SignatureChange;
  if (name == "new_object_only") return KeyframeRule::NewObjectOnly;
  return std::nullopt;
}

std::string_view to_string(KeyframeRule rule) {
  return rule == KeyframeRule::SignatureChange ? "signature_change" : "new_object_only";
}

std::vector<KeyFrame> extract_keyframes(const DetectionSet& detections, KeyframeRule rule) {
  std::map<FrameNo, KeyFrame> frames;
  for (const auto& d : detections.detections) {
    auto& kf = frames[d.frame_no];
    kf.frame_no = d.frame_no;
    kf.signature.push_back(d.class_name);
    kf.track_ids.insert(d.track_id);
  }

  std::vector<KeyFrame> keyframes;
  for (auto& [frame, candidate] : frames) {
    std::sort(candidate.signature.begin(), candidate.signature.end());
    if (!keyframes.empty()) {
      const auto& last = keyframes.back().signature;
      const bool selected = rule == KeyframeRule::SignatureChange ? candidate.signature != last
                                                                  : adds_object(last, candidate.signature);
      if (!selected) continue;
    }
    keyframes.push_back(std::move(candidate));
  }
  return keyframes;
}

const KeyFrame& keyframe_for(FrameNo frame, const std::vector<KeyFrame>& keyframes) {
  auto it = std::upper_bound(keyframes.begin(), keyframes.end(), frame,
                             [](FrameNo f, const KeyFrame& kf) { return f < kf.frame_no; });
  if (it == keyframes.begin()) {
    throw Error(ErrorCode::BeforeFirstKeyFrame,
                "frame " + std::to_string(frame) + " precedes the first key-frame");
  }
  return *std::prev(it);
}

bool is_keyframe(FrameNo frame, const std::vector<KeyFrame>& keyframes) {
  auto it = std::lower_bound(keyframes.begin(), keyframes.end(), frame,
                             [](const KeyFrame& kf, FrameNo f) { return kf.frame_no < f; });
  return it != keyframes.end() && it->frame_no == frame;
}

std::string write_keyframes_json(const std::vector<KeyFrame>& keyframes) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& kf : keyframes) {
    nlohmann::ordered_json j;
    j["frame"] = kf.frame_no;
    j["classes"] = kf.signature;
    j["track_ids"] = kf.track_ids;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace gaze2aoi
