#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/associate.hpp"

namespace gaze2aoi {

struct AoiMetrics {
  TrackId track_id = 0;
  std::string class_name;
  double first_appearance_ms = 0.0;
  std::optional<double> ttff_ms;  // measured from video start
  double dwell_gaze_ms = 0.0;
  double dwell_fix_ms = 0.0;
  std::int64_t fixation_count = 0;
  std::int64_t visit_count = 0;
  std::int64_t revisit_count = 0;

  bool operator==(const AoiMetrics&) const = default;
};

/// Square table over `nodes` (tracks ascending, then OUTSIDE).
/// counts[a][b] is the number of consecutive fixation pairs moving a -> b.
struct TransitionMatrix {
  std::vector<AoiTarget> nodes;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t at(AoiTarget from, AoiTarget to) const;
  std::int64_t total() const;
  bool operator==(const TransitionMatrix&) const = default;
};

struct Dwell {
  double gaze_ms = 0.0;
  double fix_ms = 0.0;
  bool operator==(const Dwell&) const = default;
};

struct Visits {
  std::int64_t visit_count = 0;
  std::int64_t revisit_count = 0;
  bool operator==(const Visits&) const = default;
};

/// Duration of `frames` frames at `fps`, in milliseconds.
double frames_to_ms(std::int64_t frames, double fps);

std::optional<double> compute_ttff(const std::vector<FrameAssociation>& rows, TrackId track, double fps);
Dwell compute_dwell(const std::vector<FrameAssociation>& rows, TrackId track, double fps);
/// Fixated runs separated by at most `gap_frames` non-fixated frames count
/// as one visit.
Visits compute_visits(const std::vector<FrameAssociation>& rows, TrackId track, std::int64_t gap_frames);

/// Assignments must be ordered by fixation start. `tracks` adds nodes that
/// never received a fixation.
TransitionMatrix compute_transitions(const std::vector<FixationAssignment>& assignments,
                                     const std::vector<TrackId>& tracks = {});

struct MetricsReport {
  std::vector<AoiMetrics> aois;  // ascending track_id
  TransitionMatrix transitions;

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_all(const std::vector<FrameAssociation>& rows,
                          const std::vector<FixationAssignment>& assignments,
                          const DetectionSet& detections, double fps, std::int64_t gap_frames = 0);

using TrackLabelLookup = std::function<std::optional<std::string>(TrackId)>;

inline constexpr std::string_view kMetricsCsvHeader =
    "track_id,class_name,label,first_appearance_ms,ttff_ms,dwell_gaze_ms,dwell_fix_ms,"
    "fixation_count,visit_count,revisit_count";
inline constexpr std::string_view kTransitionsCsvHeader = "from,to,count";

std::string write_metrics_csv(const std::vector<AoiMetrics>& aois, const TrackLabelLookup& labels = {});
std::string write_transitions_csv(const TransitionMatrix& matrix, bool include_outside = true);

std::string target_name(AoiTarget target);

}  // namespace gaze2aoi
