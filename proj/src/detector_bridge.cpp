#include "gaze2aoi/detector_bridge.hpp"

#include <fstream>
#include <system_error>

#include <unistd.h>

#include <json.hpp>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/process.hpp"

namespace gaze2aoi {

namespace {

std::string join_ids(const std::set<ClassId>& ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(id);
  }
  return out;
}

Subprocess spawn_adapter(const std::vector<std::string>& argv, const Subprocess::Options& options) {
  try {
    return Subprocess(argv, options);
  } catch (const std::system_error& e) {
    if (e.code() == std::errc::no_such_file_or_directory || e.code() == std::errc::permission_denied) {
      throw Error(ErrorCode::AdapterNotFound, "adapter not found: " + argv.front());
    }
    throw Error(ErrorCode::AdapterCrashed, std::string("cannot start adapter: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

std::set<FrameNo> skip_list_from_gaze(const GazeRecording& recording, const VideoMeta& meta) {
  return frames_with_gaze(recording, meta);
}

ClassManifest dump_adapter_classes(const std::vector<std::string>& adapter_cmd,
                                   const std::filesystem::path& scratch_dir) {
  if (adapter_cmd.empty()) throw Error(ErrorCode::AdapterNotFound, "no adapter command configured");
  auto path = scratch_dir / ("classes." + std::to_string(::getpid()) + ".csv");
  auto argv = adapter_cmd;
  argv.push_back("--dump-classes");
  argv.push_back(path.string());
  Subprocess::Options opts;
  opts.out = Subprocess::Stream::pipe();
  opts.err = Subprocess::Stream::pipe();
  auto proc = spawn_adapter(argv, opts);
  std::string err;
  proc.pump([](std::string_view) {}, err);
  int rc = proc.wait();
  if (rc != 0) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw Error(ErrorCode::AdapterCrashed, "adapter --dump-classes exited " + std::to_string(rc) + ": " + err);
  }
  auto bytes = read_file(path);
  std::error_code ec;
  std::filesystem::remove(path, ec);
  return parse_class_manifest(bytes, adapter_cmd.front());
}

DetectionSet validate_adapter_output(std::string_view csv, const VideoMeta& meta,
                                     const ClassManifest& manifest, const std::set<ClassId>& class_filter,
                                     const std::optional<std::set<FrameNo>>& process_frames) {
  DetectionSet set;
  try {
    set = parse_detections_csv(csv);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidAdapterOutput,
                std::string(to_string(e.code())) + ": " + e.what());
  }
  for (const auto& d : set.detections) {
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::InvalidAdapterOutput, "frame " + std::to_string(d.frame_no) + ", track " +
                                                        std::to_string(d.track_id) + ": " + why);
    };
    if (!manifest.find(d.class_id)) throw fail("class_id " + std::to_string(d.class_id) + " not in manifest");
    if (!class_filter.contains(d.class_id)) throw fail("class_id " + std::to_string(d.class_id) + " not requested");
    if (d.frame_no >= meta.frame_count) throw fail("frame beyond frame_count");
    if (process_frames && !process_frames->contains(d.frame_no)) throw fail("frame was on the skip list");
  }
  set.video_meta = meta;
  set.class_filter = class_filter;
  return set;
}

JobRunner::JobRunner(std::vector<std::string> adapter_cmd) : adapter_cmd_(std::move(adapter_cmd)) {}

JobRunner::~JobRunner() {
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

TrackingJob JobRunner::start_tracking(const std::string& video_path, const VideoMeta& meta,
                                      const ClassManifest& manifest, const std::set<ClassId>& class_filter,
                                      TrackingOptions options) {
  if (class_filter.empty()) throw Error(ErrorCode::EmptyClassFilter, "select at least one class");
  for (auto id : class_filter) {
    if (!manifest.find(id)) throw Error(ErrorCode::UnknownClass, "class_id " + std::to_string(id) + " not in manifest");
  }
  if (options.process_frames && options.process_frames->empty()) {
    throw Error(ErrorCode::NothingToProcess, "no frame carries gaze data");
  }
  if (options.downsample_factor < 1) throw Error(ErrorCode::Usage, "downsample factor must be >= 1");
  if (options.output_path.empty()) throw Error(ErrorCode::Usage, "output path required");
  if (adapter_cmd_.empty()) throw Error(ErrorCode::AdapterNotFound, "no adapter command configured");
  if (!find_executable(adapter_cmd_.front())) {
    throw Error(ErrorCode::AdapterNotFound, "adapter not found: " + adapter_cmd_.front());
  }

  std::lock_guard lock(mutex_);
  auto e = std::make_unique<Entry>();
  e->job.job_id = "job-" + std::to_string(next_id_++);
  e->job.video_path = video_path;
  e->job.class_filter = class_filter;
  e->job.process_frames = std::move(options.process_frames);
  e->job.downsample_factor = options.downsample_factor;
  e->job.output_path = options.output_path.string();
  auto snapshot = e->job;
  auto id = e->job.job_id;
  jobs_.emplace(id, std::move(e));
  workers_.emplace_back(&JobRunner::run, this, id, meta, manifest);
  return snapshot;
}

void JobRunner::run(std::string job_id, VideoMeta meta, ClassManifest manifest) {
  TrackingJob job;
  {
    std::lock_guard lock(mutex_);
    auto& e = entry(job_id);
    e.job.state = JobState::Running;
    job = e.job;
  }
  changed_.notify_all();

  const std::filesystem::path out_path = job.output_path;
  const auto frames_path = std::filesystem::path(job.output_path + ".frames");
  auto finish = [&](JobState state, std::optional<DetectionSet> output, std::string code = {},
                    std::string message = {}, std::string err = {}) {
    std::error_code ec;
    std::filesystem::remove(frames_path, ec);
    if (state == JobState::Failed) std::filesystem::remove(out_path, ec);
    {
      std::lock_guard lock(mutex_);
      auto& e = entry(job_id);
      e.job.state = state;
      e.job.error_code = std::move(code);
      e.job.error_message = std::move(message);
      e.job.adapter_stderr = std::move(err);
      e.output = std::move(output);
    }
    changed_.notify_all();
  };

  try {
    auto argv = adapter_cmd_;
    argv.push_back("--video");
    argv.push_back(job.video_path);
    argv.push_back("--classes");
    argv.push_back(join_ids(job.class_filter));
    argv.push_back("--out");
    argv.push_back(job.output_path);
    if (job.process_frames) {
      std::string list;
      for (auto n : *job.process_frames) list += std::to_string(n) + "\n";
      write_file_atomic(frames_path, list);
      argv.push_back("--skip-frames");
      argv.push_back(frames_path.string());
    }
    if (job.downsample_factor > 1) {
      argv.push_back("--downsample");
      argv.push_back(std::to_string(job.downsample_factor));
    }

    Subprocess::Options opts;
    opts.out = Subprocess::Stream::pipe();
    opts.err = Subprocess::Stream::pipe();
    auto proc = spawn_adapter(argv, opts);
    std::string err;
    proc.pump(
        [&](std::string_view line) {
          auto j = nlohmann::json::parse(line, nullptr, false);
          std::lock_guard lock(mutex_);
          auto& e = entry(job_id);
          if (!j.is_discarded() && j.is_object() && j.contains("progress") && j["progress"].is_number_integer()) {
            e.job.progress_frames = std::max(e.job.progress_frames, j["progress"].get<std::int64_t>());
          } else {
            e.job.log.emplace_back(line);
          }
        },
        err);
    int rc = proc.wait();
    if (rc != 0) {
      finish(JobState::Failed, std::nullopt, "AdapterCrashed", "adapter exited with status " + std::to_string(rc),
             std::move(err));
      return;
    }
    std::string csv;
    try {
      csv = read_file(out_path);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidAdapterOutput, "adapter wrote no output file");
    }
    auto set = validate_adapter_output(csv, meta, manifest, job.class_filter, job.process_frames);
    finish(JobState::Done, std::move(set), {}, {}, std::move(err));
  } catch (const Error& e) {
    finish(JobState::Failed, std::nullopt, std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    finish(JobState::Failed, std::nullopt, "AdapterCrashed", e.what());
  }
}

JobRunner::Entry& JobRunner::entry(const std::string& job_id) {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "unknown job " + job_id);
  return *it->second;
}

const JobRunner::Entry& JobRunner::entry(const std::string& job_id) const {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "unknown job " + job_id);
  return *it->second;
}

TrackingJob JobRunner::poll_job(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return entry(job_id).job;
}

TrackingJob JobRunner::wait(const std::string& job_id) const {
  std::unique_lock lock(mutex_);
  const auto& e = entry(job_id);
  changed_.wait(lock, [&] { return e.job.state == JobState::Done || e.job.state == JobState::Failed; });
  return e.job;
}

std::optional<DetectionSet> JobRunner::result(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return entry(job_id).output;
}

}  // namespace gaze2aoi
