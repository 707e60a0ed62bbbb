#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/gaze_io.hpp"

namespace gaze2aoi {

/// The (detected, gazed, fixated) tuple for one object in one frame.
struct FrameAssociation {
  FrameNo frame_no = 0;
  TrackId track_id = 0;
  bool detected = true;
  bool gazed = false;
  bool fixated = false;

  bool operator==(const FrameAssociation&) const = default;
};

/// Fixation target; std::nullopt stands for OUTSIDE every AOI.
using AoiTarget = std::optional<TrackId>;

struct FixationAssignment {
  FixationId fixation_id = 0;
  AoiTarget target;

  bool operator==(const FixationAssignment&) const = default;
};

/// Inclusive frame range.
struct FrameSpan {
  FrameNo first = 0;
  FrameNo last = 0;
};

/// Boundary-inclusive point-in-box test.
bool hit_test(double px, double py, const Box& box);

/// Frames whose windows overlap the fixation's [start, end) interval,
/// clamped to [0, frame_count). Empty when nothing overlaps.
std::optional<FrameSpan> fixation_frames(const Fixation& fixation, const VideoMeta& meta);

/// Rows ordered by (frame_no, track_id), one per detection.
std::vector<FrameAssociation> associate_frames(const GazeRecording& recording,
                                               const DetectionSet& detections,
                                               const VideoMeta& meta);

/// One assignment per fixation, in recording order. The fixation is resolved
/// at its midpoint frame to the smallest containing box (lowest track_id on
/// ties) or OUTSIDE.
std::vector<FixationAssignment> assign_fixations(const GazeRecording& recording,
                                                 const DetectionSet& detections,
                                                 const VideoMeta& meta);

/// The fixation shown for a frame: among those overlapping its window, the
/// one with the latest start.
const Fixation* active_fixation(const GazeRecording& recording, FrameNo frame, const VideoMeta& meta);

using LabelLookup = std::function<std::optional<std::string>(TrackId, FrameNo)>;

inline constexpr std::string_view kAssociationsCsvHeader =
    "frame,track_id,class_name,detected,gazed,fixated,label";

std::string write_associations_csv(const std::vector<FrameAssociation>& rows,
                                   const DetectionSet& detections, const LabelLookup& labels = {});

std::vector<FrameAssociation> parse_associations_csv(std::string_view bytes);

}  // namespace gaze2aoi
