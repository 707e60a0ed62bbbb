#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gaze2aoi/associate.hpp"
#include "gaze2aoi/config.hpp"
#include "gaze2aoi/keyframes.hpp"
#include "gaze2aoi/labels.hpp"
#include "gaze2aoi/metrics.hpp"

// The end-to-end steps shared by the command-line tool and the HTTP service.
// Both call these so their exports agree byte for byte.
namespace gaze2aoi {

/// `<path>.meta.json`.
std::filesystem::path meta_sidecar(const std::filesystem::path& path);

/// `explicit_path` when given, else the sidecar next to `anchor`.
VideoMeta load_video_meta(const std::optional<std::filesystem::path>& explicit_path,
                          const std::filesystem::path& anchor);

struct PreparedGaze {
  GazeRecording recording;
  std::vector<std::string> warnings;
};

/// parse, derive fixations, then shift by the configured offset.
PreparedGaze prepare_gaze(std::string_view csv, std::string subject_id, double offset_ms);
PreparedGaze load_gaze(const std::filesystem::path& path, const Config& config);

DetectionSet load_detections(const std::filesystem::path& path);

struct Analysis {
  std::vector<FrameAssociation> associations;
  std::vector<FixationAssignment> assignments;
  MetricsReport report;
  std::vector<KeyFrame> keyframes;
};

Analysis analyze(const GazeRecording& recording, const DetectionSet& detections, const VideoMeta& meta,
                 const Config& config);

/// Metrics from previously written association rows.
MetricsReport metrics_from_associations(const std::vector<FrameAssociation>& rows, const GazeRecording& recording,
                                        const DetectionSet& detections, const VideoMeta& meta,
                                        const Config& config);

std::string export_associations_csv(const std::vector<FrameAssociation>& rows, const DetectionSet& detections,
                                    const LabelStore& labels);
/// The label column is each track's most recent label.
std::string export_metrics_csv(const MetricsReport& report, const LabelStore& labels, bool labelled_only);
std::string export_transitions_csv(const MetricsReport& report);

}  // namespace gaze2aoi
