#include "gaze2aoi/service.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "gaze2aoi/files.hpp"
#include "gaze2aoi/overlay.hpp"
#include "text.hpp"

namespace gaze2aoi {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kSessionFile = "session.json";
constexpr const char* kLabelsFile = "labels.json";
constexpr const char* kRunsDir = "runs";

HttpResponse json_response(int status, const ordered_json& body) { return {status, "application/json", body.dump()}; }

HttpResponse route_not_found(const std::string& method, const std::string& path) {
  ordered_json body;
  body["code"] = "NotFound";
  body["message"] = "no route for " + method + " " + path;
  return json_response(404, body);
}

HttpResponse error_response(ErrorCode code, const std::string& message) {
  ordered_json body;
  body["code"] = to_string(code);
  body["message"] = message;
  return json_response(http_status(code), body);
}

nlohmann::json parse_body(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  return j;
}

template <class T>
T body_field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "' has the wrong type");
  }
}

std::int64_t parse_path_int(const std::string& s, const char* what) {
  auto v = text::parse_int(s);
  if (!v) throw Error(ErrorCode::Usage, std::string(what) + " must be an integer");
  return *v;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  while (!path.empty()) {
    auto slash = path.find('/');
    auto part = path.substr(0, slash);
    if (!part.empty()) parts.emplace_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

ordered_json meta_json(const VideoMeta& m) {
  ordered_json j;
  j["fps"] = m.fps;
  j["width"] = m.width_px;
  j["height"] = m.height_px;
  j["frame_count"] = m.frame_count;
  return j;
}

ordered_json optional_string(const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(); }

bool is_run_output(const std::string& path) {
  return path.rfind(std::string(kRunsDir) + "/", 0) == 0;
}

}  // namespace

SessionFiles parse_session_json(std::string_view bytes) {
  auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "session.json is not a JSON object");
  SessionFiles f;
  try {
    f.session_id = j.at("session_id").get<std::string>();
    f.video = j.at("video").get<std::string>();
    f.gaze = j.at("gaze").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("session.json: ") + e.what());
  }
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(ErrorCode::ParseError, std::string("session.json: ") + key + " must be a string");
    return j[key].get<std::string>();
  };
  f.video_meta = opt("video_meta");
  f.detections = opt("detections");
  f.classes = opt("classes");
  if (j.contains("frame_stride")) {
    if (!j["frame_stride"].is_number_integer() || j["frame_stride"].get<std::int64_t>() < 1) {
      throw Error(ErrorCode::ParseError, "session.json: frame_stride must be a positive integer");
    }
    f.frame_stride = j["frame_stride"].get<std::int64_t>();
  }
  return f;
}

std::string write_session_json(const SessionFiles& f) {
  ordered_json j;
  j["session_id"] = f.session_id;
  j["video"] = f.video;
  j["video_meta"] = optional_string(f.video_meta);
  j["gaze"] = f.gaze;
  j["detections"] = optional_string(f.detections);
  j["classes"] = optional_string(f.classes);
  j["frame_stride"] = f.frame_stride;
  return j.dump(2) + "\n";
}

SubjectCheck check_subjects(const std::map<std::string, std::filesystem::path>& files, const std::string& pattern) {
  SubjectCheck check;
  std::set<std::string> distinct;
  std::vector<std::string> missing;
  for (const auto& [role, path] : files) {
    auto id = extract_subject(path, pattern);
    check.subjects[role] = id;
    if (id) {
      distinct.insert(*id);
    } else {
      missing.push_back(role);
    }
  }
  check.ok = distinct.size() <= 1 && missing.empty();
  if (distinct.size() > 1) {
    check.message = "files refer to different subjects:";
    for (const auto& [role, id] : check.subjects) {
      if (id) check.message += " " + role + "=" + *id;
    }
  } else if (!missing.empty()) {
    check.message = "no subject id in the file name of:";
    for (const auto& role : missing) check.message += " " + role;
  }
  return check;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownJob:
    case ErrorCode::UnknownTrack:
    case ErrorCode::UnknownLabel:
    case ErrorCode::FrameOutOfRange:
    case ErrorCode::NoSession:
      return 404;
    case ErrorCode::NotAKeyFrame:
    case ErrorCode::BeforeFirstKeyFrame:
    case ErrorCode::NoDetections:
    case ErrorCode::SessionExists:
      return 409;
    case ErrorCode::AdapterNotFound:
    case ErrorCode::AdapterCrashed:
    case ErrorCode::InvalidAdapterOutput:
    case ErrorCode::DecoderFailed:
    case ErrorCode::EncoderFailed:
    case ErrorCode::InvalidConfig:
      return 500;
    default:
      return 422;
  }
}

struct SessionService::Snapshot {
  SessionFiles files;
  VideoMeta video_meta;  // decoded stream
  VideoMeta meta;        // timeline of the active detections
  std::shared_ptr<const PreparedGaze> gaze;
  std::shared_ptr<const DetectionSet> detections;
  std::shared_ptr<const Analysis> analysis;
  std::shared_ptr<const LabelStore> labels;
  SubjectCheck subject_check;

  mutable std::once_flag overlay_once;
  mutable std::unique_ptr<OverlayBuilder> overlay;

  const OverlayBuilder& overlay_builder() const {
    std::call_once(overlay_once, [&] {
      overlay = std::make_unique<OverlayBuilder>(analysis->associations, *detections, gaze->recording, *labels, meta);
    });
    return *overlay;
  }

  const Analysis& require_analysis() const {
    if (!analysis) throw Error(ErrorCode::NoDetections, "run tracking or attach a detections file first");
    return *analysis;
  }

  // Shares everything except the lazily built overlay index.
  std::shared_ptr<Snapshot> with_labels(LabelStore store) const {
    auto next = std::make_shared<Snapshot>();
    next->files = files;
    next->video_meta = video_meta;
    next->meta = meta;
    next->gaze = gaze;
    next->detections = detections;
    next->analysis = analysis;
    next->labels = std::make_shared<const LabelStore>(std::move(store));
    next->subject_check = subject_check;
    return next;
  }
};

struct SessionService::Server {
  httplib::Server http;
};

SessionService::SessionService(std::filesystem::path session_dir, Config config)
    : dir_(std::move(session_dir)), config_(std::move(config)), runner_(std::make_unique<JobRunner>(config_.adapter_cmd)) {
  std::filesystem::create_directories(dir_);
  if (std::filesystem::exists(dir_ / kSessionFile)) {
    current_ = load(parse_session_json(read_file(dir_ / kSessionFile)));
  }
}

SessionService::~SessionService() {
  stop();
  for (auto& t : watchers_) {
    if (t.joinable()) t.join();
  }
  runner_.reset();
}

std::filesystem::path SessionService::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : dir_ / p;
}

std::shared_ptr<SessionService::Snapshot> SessionService::load(const SessionFiles& files) const {
  auto s = std::make_shared<Snapshot>();
  s->files = files;
  const auto video = resolve(files.video);
  s->video_meta = load_video_meta(files.video_meta ? std::optional(resolve(*files.video_meta)) : std::nullopt, video);
  s->gaze = std::make_shared<const PreparedGaze>(load_gaze(resolve(files.gaze), config_));
  s->meta = downsample(s->gaze->recording, s->video_meta, files.frame_stride).meta;

  std::map<std::string, std::filesystem::path> named{{"video", video}, {"gaze", resolve(files.gaze)}};
  if (files.detections) {
    auto path = resolve(*files.detections);
    auto set = load_detections(path);
    set.video_meta = s->meta;
    s->detections = std::make_shared<const DetectionSet>(std::move(set));
    s->analysis = std::make_shared<const Analysis>(analyze(s->gaze->recording, *s->detections, s->meta, config_));
    if (!is_run_output(*files.detections)) named.emplace("detections", path);
  }
  s->subject_check = check_subjects(named, config_.subject_pattern);

  LabelStore store;
  if (std::filesystem::exists(dir_ / kLabelsFile)) {
    store = load_labels(dir_ / kLabelsFile);
  } else {
    store.session_id = files.session_id;
  }
  s->labels = std::make_shared<const LabelStore>(std::move(store));
  return s;
}

std::shared_ptr<const SessionService::Snapshot> SessionService::snapshot() const {
  std::shared_lock lock(snapshot_mutex_);
  return current_;
}

std::shared_ptr<const SessionService::Snapshot> SessionService::require_session() const {
  auto s = snapshot();
  if (!s) throw Error(ErrorCode::NoSession, "no session; POST /api/session first");
  return s;
}

void SessionService::publish(std::shared_ptr<const Snapshot> next) {
  std::unique_lock lock(snapshot_mutex_);
  current_ = std::move(next);
}

bool SessionService::has_session() const { return snapshot() != nullptr; }

void SessionService::create_session(SessionFiles files) {
  std::lock_guard writer(writer_mutex_);
  if (snapshot()) throw Error(ErrorCode::SessionExists, "this directory already holds session " + snapshot()->files.session_id);
  if (files.video.empty() || files.gaze.empty()) throw Error(ErrorCode::Usage, "video and gaze are required");
  if (files.session_id.empty()) files.session_id = std::filesystem::path(files.video).stem().string();
  auto loaded = load(files);  // validate before anything touches disk
  write_file_atomic(dir_ / kSessionFile, write_session_json(files));
  publish(std::move(loaded));
}

const ClassManifest& SessionService::manifest() {
  std::lock_guard lock(manifest_mutex_);
  if (!manifest_) {
    auto s = snapshot();
    if (s && s->files.classes) {
      auto path = resolve(*s->files.classes);
      manifest_ = parse_class_manifest(read_file(path), path.string());
    } else {
      manifest_ = dump_adapter_classes(config_.adapter_cmd, dir_);
    }
  }
  return *manifest_;
}

void SessionService::activate(const std::string& job_id) {
  std::string error;
  try {
    auto job = runner_->wait(job_id);
    if (job.state == JobState::Done) {
      std::string output;
      std::int64_t stride = 1;
      {
        std::lock_guard lock(jobs_mutex_);
        output = jobs_.at(job_id).output;
        stride = jobs_.at(job_id).frame_stride;
      }
      std::lock_guard writer(writer_mutex_);
      auto files = require_session()->files;
      files.detections = output;
      files.frame_stride = stride;
      auto next = load(files);
      write_file_atomic(dir_ / kSessionFile, write_session_json(files));
      publish(std::move(next));
    }
  } catch (const Error& e) {
    error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    error = e.what();
  }
  {
    std::lock_guard lock(jobs_mutex_);
    auto& info = jobs_.at(job_id);
    info.settled = true;
    info.activation_error = std::move(error);
  }
  jobs_changed_.notify_all();
}

void SessionService::wait_for_job(const std::string& job_id) {
  std::unique_lock lock(jobs_mutex_);
  if (!jobs_.contains(job_id)) throw Error(ErrorCode::UnknownJob, "unknown job " + job_id);
  jobs_changed_.wait(lock, [&] { return jobs_.at(job_id).settled; });
}

HttpResponse SessionService::handle(const HttpRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    ordered_json body;
    body["code"] = "Internal";
    body["message"] = e.what();
    return json_response(500, body);
  }
}

HttpResponse SessionService::dispatch(const HttpRequest& req) {
  const auto parts = split_path(req.path);
  const auto& m = req.method;
  auto not_found = [&] { return route_not_found(m, req.path); };
  if (parts.size() < 2 || parts[0] != "api") return not_found();
  const auto& head = parts[1];

  if (head == "session" && parts.size() == 2) {
    if (m == "GET") return get_session(*require_session());
    if (m == "POST") return post_session(req);
  } else if (head == "classes" && parts.size() == 2 && m == "GET") {
    return get_classes(req);
  } else if (head == "jobs") {
    if (parts.size() == 3 && parts[2] == "track" && m == "POST") return post_track(req);
    if (parts.size() == 3 && m == "GET") return get_job(parts[2]);
  } else if (head == "keyframes" && parts.size() == 2 && m == "GET") {
    auto s = require_session();
    return {200, "application/json", write_keyframes_json(s->require_analysis().keyframes)};
  } else if (head == "frames" && parts.size() == 4 && m == "GET") {
    return get_frame(*require_session(), parse_path_int(parts[2], "frame"), parts[3]);
  } else if (head == "labels" && parts.size() == 3) {
    auto track = parse_path_int(parts[2], "track_id");
    if (m == "PUT") return put_label(track, req);
    if (m == "DELETE") return delete_label(track, req);
  } else if (head == "export" && parts.size() == 3 && m == "GET") {
    return get_export(*require_session(), parts[2], req);
  }
  return not_found();
}

HttpResponse SessionService::get_session(const Snapshot& s) const {
  ordered_json j;
  j["session_id"] = s.files.session_id;
  j["video"] = s.files.video;
  j["gaze"] = s.files.gaze;
  j["detections"] = optional_string(s.files.detections);
  j["frame_stride"] = s.files.frame_stride;
  j["video_meta"] = meta_json(s.video_meta);
  j["timeline"] = meta_json(s.meta);
  const auto& rec = s.gaze->recording;
  j["gaze_summary"] = {{"subject_id", rec.subject_id},
                       {"sample_count", rec.samples.size()},
                       {"sample_rate_hz", rec.sample_rate_hz},
                       {"fixation_count", rec.fixations.size()}};
  j["warnings"] = s.gaze->warnings;
  if (s.detections) {
    j["track_count"] = track_ids(*s.detections).size();
    j["keyframe_count"] = s.analysis->keyframes.size();
  } else {
    j["track_count"] = nullptr;
    j["keyframe_count"] = nullptr;
  }
  ordered_json check;
  check["status"] = s.subject_check.ok ? "ok" : "mismatch";
  ordered_json subjects = ordered_json::object();
  for (const auto& [role, id] : s.subject_check.subjects) subjects[role] = optional_string(id);
  check["subjects"] = subjects;
  check["message"] = s.subject_check.message;
  j["subject_check"] = check;
  return json_response(200, j);
}

HttpResponse SessionService::post_session(const HttpRequest& req) {
  auto body = parse_body(req.body);
  SessionFiles files;
  files.video = body_field<std::string>(body, "video", "");
  files.gaze = body_field<std::string>(body, "gaze", "");
  auto opt = [&](const char* key) -> std::optional<std::string> {
    auto v = body_field<std::string>(body, key, "");
    return v.empty() ? std::nullopt : std::optional(v);
  };
  files.video_meta = opt("video_meta");
  files.detections = opt("detections");
  files.classes = opt("classes");
  create_session(files);
  auto r = get_session(*require_session());
  r.status = 201;
  return r;
}

HttpResponse SessionService::get_classes(const HttpRequest& req) {
  std::string letter;
  if (auto it = req.query.find("letter"); it != req.query.end()) letter = it->second;
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const auto prefix = lower(letter);
  auto arr = ordered_json::array();
  for (const auto& e : manifest().alphabetical()) {
    if (!prefix.empty() && lower(e.class_name).rfind(prefix, 0) != 0) continue;
    arr.push_back({{"class_id", e.class_id}, {"class_name", e.class_name}});
  }
  return json_response(200, arr);
}

HttpResponse SessionService::post_track(const HttpRequest& req) {
  auto s = require_session();
  auto body = parse_body(req.body);
  std::set<ClassId> filter;
  if (body.contains("class_ids")) {
    if (!body["class_ids"].is_array()) throw Error(ErrorCode::ParseError, "class_ids must be an array");
    for (const auto& v : body["class_ids"]) {
      if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "class_ids must hold integers");
      filter.insert(v.get<ClassId>());
    }
  }
  const bool skip_ungazed = body_field<bool>(body, "skip_ungazed", false);
  const auto factor = body_field<std::int64_t>(body, "downsample", 1);
  if (filter.empty()) throw Error(ErrorCode::EmptyClassFilter, "select at least one class");
  const auto timeline = downsample(s->gaze->recording, s->video_meta, factor).meta;
  TrackingOptions opts;
  opts.downsample_factor = factor;
  if (skip_ungazed) opts.process_frames = skip_list_from_gaze(s->gaze->recording, timeline);
  const auto& classes = manifest();

  std::lock_guard lock(jobs_mutex_);
  std::filesystem::create_directories(dir_ / kRunsDir);
  std::string output;
  for (int n = 1;; ++n) {
    output = std::string(kRunsDir) + "/detections-" + std::to_string(n) + ".csv";
    bool reserved = std::any_of(jobs_.begin(), jobs_.end(), [&](const auto& kv) { return kv.second.output == output; });
    if (!reserved && !std::filesystem::exists(dir_ / output)) break;
  }
  opts.output_path = dir_ / output;
  auto job = runner_->start_tracking(resolve(s->files.video).string(), timeline, classes, filter, std::move(opts));
  jobs_[job.job_id] = JobInfo{factor, output, false, {}};
  watchers_.emplace_back([this, id = job.job_id] { activate(id); });

  ordered_json j;
  j["job_id"] = job.job_id;
  j["state"] = to_string(job.state);
  return json_response(202, j);
}

HttpResponse SessionService::get_job(const std::string& job_id) {
  auto job = runner_->poll_job(job_id);
  JobInfo info;
  {
    std::lock_guard lock(jobs_mutex_);
    info = jobs_.at(job_id);
  }
  // A finished job reads as running until its detections are live.
  std::string state(to_string(job.state));
  if (job.state == JobState::Done && !info.settled) state = "running";
  if (job.state == JobState::Done && info.settled && !info.activation_error.empty()) {
    state = "failed";
    job.error_code = "ActivationFailed";
    job.error_message = info.activation_error;
  }
  ordered_json j;
  j["job_id"] = job.job_id;
  j["state"] = state;
  j["progress_frames"] = job.progress_frames;
  j["class_ids"] = job.class_filter;
  j["downsample_factor"] = job.downsample_factor;
  j["skip_frames"] = job.process_frames ? ordered_json(job.process_frames->size()) : ordered_json();
  j["output_path"] = info.output;
  if (state == "failed") {
    j["error"] = {{"code", job.error_code}, {"message", job.error_message}, {"stderr", job.adapter_stderr}};
  } else {
    j["error"] = nullptr;
  }
  j["log"] = job.log;
  return json_response(200, j);
}

HttpResponse SessionService::get_frame(const Snapshot& s, FrameNo frame, const std::string& what) const {
  if (what != "image" && what != "overlay" && what != "objects") {
    return route_not_found("GET", "/api/frames/" + std::to_string(frame) + "/" + what);
  }
  if (frame < 0 || frame >= s.meta.frame_count) {
    throw Error(ErrorCode::FrameOutOfRange, "frame " + std::to_string(frame) + " outside 0.." +
                                                std::to_string(s.meta.frame_count - 1));
  }
  if (what == "image") {
    auto rgb = decode_frame(resolve(s.files.video).string(), s.video_meta, config_.decoder_cmd,
                            frame * s.files.frame_stride);
    return {200, "image/png",
            encode_png(rgb, static_cast<int>(s.video_meta.width_px), static_cast<int>(s.video_meta.height_px))};
  }
  const auto& analysis = s.require_analysis();
  if (what == "overlay") {
    return {200, "application/json", write_overlay_json(s.overlay_builder().build(frame), config_.colors)};
  }
  if (what == "objects") {
    const auto& dets = s.detections->detections;
    auto lo = std::lower_bound(dets.begin(), dets.end(), frame,
                               [](const Detection& d, FrameNo f) { return d.frame_no < f; });
    auto arr = ordered_json::array();
    for (auto it = lo; it != dets.end() && it->frame_no == frame; ++it) {
      FrameAssociation probe{frame, it->track_id};
      auto row = std::lower_bound(analysis.associations.begin(), analysis.associations.end(), probe,
                                  [](const FrameAssociation& a, const FrameAssociation& b) {
                                    return std::tie(a.frame_no, a.track_id) < std::tie(b.frame_no, b.track_id);
                                  });
      const bool found = row != analysis.associations.end() && row->frame_no == frame && row->track_id == it->track_id;
      const bool fixated = found && row->fixated;
      ordered_json o;
      o["track_id"] = it->track_id;
      o["class_name"] = it->class_name;
      o["fixated"] = fixated;
      o["gazed"] = found && row->gazed;
      o["effective_label"] = optional_string(effective_label(*s.labels, it->track_id, frame));
      o["color"] = to_string(fixated ? DrawColor::Green : DrawColor::Red);
      arr.push_back(std::move(o));
    }
    return json_response(200, arr);
  }
  return route_not_found("GET", "/api/frames/" + std::to_string(frame) + "/" + what);
}

HttpResponse SessionService::put_label(TrackId track, const HttpRequest& req) {
  auto body = parse_body(req.body);
  if (!body.contains("from_frame") || !body["from_frame"].is_number_integer()) {
    throw Error(ErrorCode::ParseError, "from_frame (integer) is required");
  }
  const auto from_frame = body["from_frame"].get<FrameNo>();
  const auto text = body_field<std::string>(body, "text", "");
  std::optional<std::string> author;
  if (body.contains("author") && body["author"].is_string()) author = body["author"].get<std::string>();

  std::lock_guard writer(writer_mutex_);
  auto s = require_session();
  const auto& analysis = s->require_analysis();
  LabelScope scope;
  scope.tracks = track_ids(*s->detections);
  for (const auto& k : analysis.keyframes) scope.keyframes.insert(k.frame_no);
  auto store = gaze2aoi::put_label(*s->labels, scope, track, from_frame, text, author, utc_timestamp_now());
  save_labels(dir_ / kLabelsFile, store);
  publish(s->with_labels(std::move(store)));
  return {204, "application/json", ""};
}

HttpResponse SessionService::delete_label(TrackId track, const HttpRequest& req) {
  auto it = req.query.find("from_frame");
  if (it == req.query.end()) throw Error(ErrorCode::Usage, "from_frame query parameter is required");
  const auto from_frame = parse_path_int(it->second, "from_frame");
  std::lock_guard writer(writer_mutex_);
  auto s = require_session();
  auto store = gaze2aoi::delete_label(*s->labels, track, from_frame);
  save_labels(dir_ / kLabelsFile, store);
  publish(s->with_labels(std::move(store)));
  return {204, "application/json", ""};
}

HttpResponse SessionService::get_export(const Snapshot& s, const std::string& name, const HttpRequest& req) const {
  if (name == "labels.json") return {200, "application/json", write_labels_json(*s.labels)};
  const auto& analysis = s.require_analysis();
  if (name == "associations.csv") {
    return {200, "text/csv", export_associations_csv(analysis.associations, *s.detections, *s.labels)};
  }
  if (name == "metrics.csv") {
    bool labelled_only = false;
    if (auto it = req.query.find("labelled_only"); it != req.query.end()) {
      labelled_only = it->second == "1" || it->second == "true";
    }
    return {200, "text/csv", export_metrics_csv(analysis.report, *s.labels, labelled_only)};
  }
  if (name == "transitions.csv") return {200, "text/csv", export_transitions_csv(analysis.report)};
  return route_not_found(req.method, req.path);
}

int SessionService::bind(const std::string& host, int port) {
  if (!server_) {
    server_ = std::make_unique<Server>();
    auto route = [this](const httplib::Request& hreq, httplib::Response& hres) {
      HttpRequest req{hreq.method, hreq.path, {}, hreq.body};
      for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
      auto res = handle(req);
      hres.status = res.status;
      if (res.status != 204) hres.set_content(res.body, res.content_type);
    };
    server_->http.Get(".*", route);
    server_->http.Post(".*", route);
    server_->http.Put(".*", route);
    server_->http.Delete(".*", route);
  }
  if (port == 0) {
    int bound = server_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Usage, "cannot bind " + host);
    return bound;
  }
  if (!server_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::Usage, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void SessionService::run() {
  if (!server_) throw Error(ErrorCode::Usage, "bind() before run()");
  server_->http.listen_after_bind();
}

void SessionService::stop() {
  if (server_) server_->http.stop();
}

}  // namespace gaze2aoi
