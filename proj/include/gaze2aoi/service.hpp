#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "gaze2aoi/config.hpp"
#include "gaze2aoi/detector_bridge.hpp"
#include "gaze2aoi/error.hpp"
#include "gaze2aoi/pipeline.hpp"

namespace gaze2aoi {

/// Contents of `session.json`. Relative paths resolve against the session
/// directory.
struct SessionFiles {
  std::string session_id;
  std::string video;
  std::optional<std::string> video_meta;
  std::string gaze;
  std::optional<std::string> detections;
  std::optional<std::string> classes;
  /// Down-sampling factor the active detections were produced with.
  std::int64_t frame_stride = 1;

  bool operator==(const SessionFiles&) const = default;
};

SessionFiles parse_session_json(std::string_view bytes);
std::string write_session_json(const SessionFiles& files);

struct SubjectCheck {
  bool ok = true;
  /// role ("video", "gaze", "detections") -> extracted id, null if none.
  std::map<std::string, std::optional<std::string>> subjects;
  std::string message;
};

/// Compares the subject ids extracted from each named file.
SubjectCheck check_subjects(const std::map<std::string, std::filesystem::path>& files, const std::string& pattern);

/// HTTP status for an error code.
int http_status(ErrorCode code);

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// One labelling session rooted at a directory. Readers work on immutable
/// snapshots; writers are serialized and persist before publishing.
class SessionService {
 public:
  SessionService(std::filesystem::path session_dir, Config config);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  /// Writes session.json and loads it. Throws SessionExists when the
  /// directory already holds a session.
  void create_session(SessionFiles files);
  bool has_session() const;

  /// Routes one request. Never throws; failures become error responses.
  HttpResponse handle(const HttpRequest& request);

  /// Binds the listening socket; port 0 picks a free one. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a prior bind().
  void run();
  void stop();

  /// Blocks until the job has finished and, on success, its detections are
  /// the active set.
  void wait_for_job(const std::string& job_id);

 private:
  struct Snapshot;
  struct JobInfo {
    std::int64_t frame_stride = 1;
    std::string output;  // relative to the session directory
    bool settled = false;
    std::string activation_error;
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  std::shared_ptr<const Snapshot> require_session() const;
  void publish(std::shared_ptr<const Snapshot> next);
  std::shared_ptr<Snapshot> load(const SessionFiles& files) const;
  std::filesystem::path resolve(const std::string& path) const;
  const ClassManifest& manifest();
  void activate(const std::string& job_id);

  HttpResponse dispatch(const HttpRequest& request);
  HttpResponse get_session(const Snapshot& s) const;
  HttpResponse post_session(const HttpRequest& request);
  HttpResponse get_classes(const HttpRequest& request);
  HttpResponse post_track(const HttpRequest& request);
  HttpResponse get_job(const std::string& job_id);
  HttpResponse get_frame(const Snapshot& s, FrameNo frame, const std::string& what) const;
  HttpResponse put_label(TrackId track, const HttpRequest& request);
  HttpResponse delete_label(TrackId track, const HttpRequest& request);
  HttpResponse get_export(const Snapshot& s, const std::string& name, const HttpRequest& request) const;

  std::filesystem::path dir_;
  Config config_;

  mutable std::shared_mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> current_;
  std::mutex writer_mutex_;  // label edits, activation, session creation

  std::mutex manifest_mutex_;
  std::optional<ClassManifest> manifest_;

  std::unique_ptr<JobRunner> runner_;
  std::mutex jobs_mutex_;
  std::condition_variable jobs_changed_;
  std::map<std::string, JobInfo> jobs_;
  std::vector<std::thread> watchers_;

  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace gaze2aoi
