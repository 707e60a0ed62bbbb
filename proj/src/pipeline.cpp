#include "gaze2aoi/pipeline.hpp"

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"

namespace gaze2aoi {

std::filesystem::path meta_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta.json";
  return p;
}

VideoMeta load_video_meta(const std::optional<std::filesystem::path>& explicit_path,
                          const std::filesystem::path& anchor) {
  return parse_video_meta_json(read_file(explicit_path ? *explicit_path : meta_sidecar(anchor)));
}

PreparedGaze prepare_gaze(std::string_view csv, std::string subject_id, double offset_ms) {
  auto derived = derive_fixations(parse_gaze_csv(csv, std::move(subject_id)));
  return {apply_offset(std::move(derived.recording), offset_ms), std::move(derived.warnings)};
}

PreparedGaze load_gaze(const std::filesystem::path& path, const Config& config) {
  auto subject = extract_subject(path, config.subject_pattern).value_or("");
  return prepare_gaze(read_file(path), std::move(subject), config.gaze_offset_ms);
}

DetectionSet load_detections(const std::filesystem::path& path) { return parse_detections_csv(read_file(path)); }

Analysis analyze(const GazeRecording& recording, const DetectionSet& detections, const VideoMeta& meta,
                 const Config& config) {
  Analysis a;
  a.associations = associate_frames(recording, detections, meta);
  a.assignments = assign_fixations(recording, detections, meta);
  a.report = compute_all(a.associations, a.assignments, detections, meta.fps, config.gap_frames);
  a.keyframes = extract_keyframes(detections, config.keyframe_rule);
  return a;
}

MetricsReport metrics_from_associations(const std::vector<FrameAssociation>& rows, const GazeRecording& recording,
                                        const DetectionSet& detections, const VideoMeta& meta,
                                        const Config& config) {
  return compute_all(rows, assign_fixations(recording, detections, meta), detections, meta.fps,
                     config.gap_frames);
}

std::string export_associations_csv(const std::vector<FrameAssociation>& rows, const DetectionSet& detections,
                                    const LabelStore& labels) {
  return write_associations_csv(rows, detections,
                                [&](TrackId t, FrameNo f) { return effective_label(labels, t, f); });
}

std::string export_metrics_csv(const MetricsReport& report, const LabelStore& labels, bool labelled_only) {
  auto lookup = [&](TrackId t) { return latest_label(labels, t); };
  if (labelled_only) return write_metrics_csv(filter_unlabelled(report.aois, labels), lookup);
  return write_metrics_csv(report.aois, lookup);
}

std::string export_transitions_csv(const MetricsReport& report) { return write_transitions_csv(report.transitions); }

}  // namespace gaze2aoi
