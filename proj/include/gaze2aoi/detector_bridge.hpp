#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/gaze_io.hpp"

namespace gaze2aoi {

enum class JobState { Queued, Running, Done, Failed };

std::string_view to_string(JobState state);

struct TrackingJob {
  std::string job_id;
  std::string video_path;
  std::set<ClassId> class_filter;
  /// Frames the adapter runs on; absent means every frame.
  std::optional<std::set<FrameNo>> process_frames;
  std::int64_t downsample_factor = 1;
  JobState state = JobState::Queued;
  std::int64_t progress_frames = 0;
  std::string output_path;
  // Populated when state == Failed.
  std::string error_code;
  std::string error_message;
  std::string adapter_stderr;
  /// Adapter stdout lines that were not progress messages.
  std::vector<std::string> log;
};

struct TrackingOptions {
  std::optional<std::set<FrameNo>> process_frames;
  std::int64_t downsample_factor = 1;
  std::filesystem::path output_path;
};

/// Frames the adapter must run on when ungazed frames are skipped.
std::set<FrameNo> skip_list_from_gaze(const GazeRecording& recording, const VideoMeta& meta);

/// Asks the adapter for its class manifest via `--dump-classes <path>`.
ClassManifest dump_adapter_classes(const std::vector<std::string>& adapter_cmd,
                                   const std::filesystem::path& scratch_dir);

/// Runs adapter jobs on background threads. Validation failures surface
/// synchronously from start_tracking; adapter failures land in the job.
class JobRunner {
 public:
  explicit JobRunner(std::vector<std::string> adapter_cmd);
  ~JobRunner();
  JobRunner(const JobRunner&) = delete;
  JobRunner& operator=(const JobRunner&) = delete;

  /// `meta` describes the timeline the adapter writes, i.e. after
  /// down-sampling.
  TrackingJob start_tracking(const std::string& video_path, const VideoMeta& meta,
                             const ClassManifest& manifest, const std::set<ClassId>& class_filter,
                             TrackingOptions options);

  TrackingJob poll_job(const std::string& job_id) const;
  /// Blocks until the job is done or failed.
  TrackingJob wait(const std::string& job_id) const;
  /// Parsed and validated output of a done job.
  std::optional<DetectionSet> result(const std::string& job_id) const;

 private:
  struct Entry {
    TrackingJob job;
    std::optional<DetectionSet> output;
  };

  void run(std::string job_id, VideoMeta meta, ClassManifest manifest);
  Entry& entry(const std::string& job_id);
  const Entry& entry(const std::string& job_id) const;

  std::vector<std::string> adapter_cmd_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, std::unique_ptr<Entry>> jobs_;
  std::vector<std::thread> workers_;
  std::uint64_t next_id_ = 1;
};

/// Checks an adapter's CSV against the job contract; throws
/// Error(InvalidAdapterOutput).
DetectionSet validate_adapter_output(std::string_view csv, const VideoMeta& meta,
                                     const ClassManifest& manifest, const std::set<ClassId>& class_filter,
                                     const std::optional<std::set<FrameNo>>& process_frames);

}  // namespace gaze2aoi
