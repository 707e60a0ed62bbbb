#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaze2aoi/config.hpp"
#include "gaze2aoi/detector_bridge.hpp"
#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/overlay.hpp"
#include "gaze2aoi/pipeline.hpp"
#include "gaze2aoi/service.hpp"

namespace fs = std::filesystem;
using namespace gaze2aoi;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::AdapterNotFound:
    case ErrorCode::AdapterCrashed:
    case ErrorCode::InvalidAdapterOutput:
    case ErrorCode::DecoderFailed:
    case ErrorCode::EncoderFailed:
    case ErrorCode::FileUnreadable:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

int report(std::string_view code, std::string_view message, int status) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
  return status;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

LabelStore labels_or_empty(const std::string& path) {
  if (path.empty()) return {};
  return load_labels(path);
}

// Output files written only after every result is computed; on failure the
// ones already written are removed.
class Outputs {
 public:
  void add(fs::path path, std::string bytes) { pending_.emplace_back(std::move(path), std::move(bytes)); }
  void commit() {
    try {
      for (const auto& [path, bytes] : pending_) {
        write_file_atomic(path, bytes);
        written_.push_back(path);
      }
    } catch (...) {
      for (const auto& p : written_) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> pending_;
  std::vector<fs::path> written_;
};

std::set<ClassId> resolve_classes(const std::string& list, const ClassManifest& manifest) {
  std::set<ClassId> ids;
  std::string_view rest = list;
  while (true) {
    auto comma = rest.find(',');
    std::string token(rest.substr(0, comma));
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) token.erase(0, 1);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.pop_back();
    if (!token.empty()) {
      const ClassManifest::Entry* entry = nullptr;
      char* end = nullptr;
      long long id = std::strtoll(token.c_str(), &end, 10);
      if (end && *end == '\0') {
        entry = manifest.find(static_cast<ClassId>(id));
      } else {
        entry = manifest.find(std::string_view(token));
      }
      if (!entry) throw Error(ErrorCode::UnknownClass, "class '" + token + "' not in manifest");
      ids.insert(entry->class_id);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ids;
}

struct DetectArgs {
  std::string video, classes, out, gaze, video_meta, class_manifest;
  bool skip_ungazed = false;
  std::int64_t downsample = 1;
};

int run_detect(const DetectArgs& a, const Config& config) {
  if (a.skip_ungazed && a.gaze.empty()) throw Error(ErrorCode::Usage, "--skip-ungazed needs --gaze");
  const auto meta = load_video_meta(opt_path(a.video_meta), a.video);
  GazeRecording recording;
  if (!a.gaze.empty()) recording = load_gaze(a.gaze, config).recording;
  const auto timeline = downsample(recording, meta, a.downsample).meta;

  ClassManifest manifest;
  std::set<ClassId> filter;
  if (a.classes.find_first_not_of(" ,") == std::string::npos) {
    throw Error(ErrorCode::EmptyClassFilter, "select at least one class");
  }
  const fs::path out(a.out);
  if (a.class_manifest.empty()) {
    auto scratch = out.parent_path().empty() ? fs::path(".") : out.parent_path();
    manifest = dump_adapter_classes(config.adapter_cmd, scratch);
  } else {
    manifest = parse_class_manifest(read_file(a.class_manifest), a.class_manifest);
  }
  filter = resolve_classes(a.classes, manifest);

  TrackingOptions opts;
  opts.downsample_factor = a.downsample;
  opts.output_path = out;
  if (a.skip_ungazed) opts.process_frames = skip_list_from_gaze(recording, timeline);

  JobRunner runner(config.adapter_cmd);
  auto job = runner.start_tracking(a.video, timeline, manifest, filter, std::move(opts));
  job = runner.wait(job.job_id);
  if (job.state != JobState::Done) {
    std::string message = job.error_message;
    if (!job.adapter_stderr.empty()) message += "; stderr: " + job.adapter_stderr;
    return report(job.error_code, message, kExitRuntime);
  }
  try {
    write_file_atomic(meta_sidecar(out), write_video_meta_json(timeline));
  } catch (...) {
    std::error_code ec;
    fs::remove(out, ec);
    throw;
  }
  nlohmann::ordered_json summary;
  summary["job_id"] = job.job_id;
  summary["state"] = "done";
  summary["progress_frames"] = job.progress_frames;
  summary["rows"] = runner.result(job.job_id)->detections.size();
  std::cout << summary.dump() << std::endl;
  return 0;
}

struct AssociateArgs {
  std::string video_meta, gaze, detections, out, labels;
};

int run_associate(const AssociateArgs& a, const Config& config) {
  const auto meta = load_video_meta(fs::path(a.video_meta), a.detections);
  const auto recording = load_gaze(a.gaze, config).recording;
  const auto detections = load_detections(a.detections);
  const auto labels = labels_or_empty(a.labels);
  Outputs outputs;
  outputs.add(a.out, export_associations_csv(associate_frames(recording, detections, meta), detections, labels));
  outputs.commit();
  return 0;
}

struct MetricsArgs {
  std::string associations, gaze, detections, out_metrics, out_transitions, labels, video_meta;
  bool labelled_only = false;
};

int run_metrics(const MetricsArgs& a, const Config& config) {
  const auto meta = load_video_meta(opt_path(a.video_meta), a.detections);
  const auto rows = parse_associations_csv(read_file(a.associations));
  const auto recording = load_gaze(a.gaze, config).recording;
  const auto detections = load_detections(a.detections);
  const auto labels = labels_or_empty(a.labels);
  const auto report = metrics_from_associations(rows, recording, detections, meta, config);
  Outputs outputs;
  outputs.add(a.out_metrics, export_metrics_csv(report, labels, a.labelled_only));
  outputs.add(a.out_transitions, export_transitions_csv(report));
  outputs.commit();
  return 0;
}

struct KeyframesArgs {
  std::string detections, out;
};

int run_keyframes(const KeyframesArgs& a, const Config& config) {
  Outputs outputs;
  outputs.add(a.out, write_keyframes_json(extract_keyframes(load_detections(a.detections), config.keyframe_rule)));
  outputs.commit();
  return 0;
}

struct AnnotateArgs {
  std::string video, gaze, detections, labels, out, video_meta;
  bool skip_ungazed = false;
};

int run_annotate(const AnnotateArgs& a, const Config& config) {
  const auto video_meta = load_video_meta(opt_path(a.video_meta), a.video);
  VideoMeta timeline = video_meta;
  if (fs::exists(meta_sidecar(a.detections))) timeline = parse_video_meta_json(read_file(meta_sidecar(a.detections)));
  const auto stride = std::max<std::int64_t>(1, std::llround(video_meta.fps / timeline.fps));
  const auto recording = load_gaze(a.gaze, config).recording;
  auto detections = load_detections(a.detections);
  const auto labels = labels_or_empty(a.labels);
  const auto analysis = analyze(recording, detections, timeline, config);
  OverlayBuilder builder(analysis.associations, detections, recording, labels, timeline);

  RenderRequest req;
  req.video_path = a.video;
  req.output_path = a.out;
  req.meta = video_meta;
  req.decoder_cmd = config.decoder_cmd;
  req.encoder_cmd = config.encoder_cmd;
  req.frame_stride = stride;
  req.palette = config.colors;
  if (a.skip_ungazed) req.frames = frames_with_gaze(recording, timeline);
  try {
    auto written = render_annotated_video(req, [&](FrameNo n) { return builder.build(n); });
    nlohmann::ordered_json summary;
    summary["frames_written"] = written;
    std::cout << summary.dump() << std::endl;
  } catch (...) {
    std::error_code ec;
    fs::remove(a.out, ec);
    throw;
  }
  return 0;
}

struct ServeArgs {
  std::string session_dir, host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& a, const Config& config) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);  // inherited by every thread created below

  SessionService service(a.session_dir, config);
  const int port = service.bind(a.host, a.port);
  nlohmann::ordered_json ready;
  ready["listening"] = a.host + ":" + std::to_string(port);
  ready["port"] = port;
  std::cout << ready.dump() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    service.stop();
  });
  service.run();
  // Unblock the waiter when the server stopped for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-to-AOI engine: fuse tracker detections with eye-tracking data"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file (default: $GAZE2AOI_CONFIG)");

  DetectArgs detect;
  auto* cmd_detect = app.add_subcommand("detect", "run the detector adapter over a video");
  cmd_detect->add_option("--video", detect.video)->required();
  cmd_detect->add_option("--classes", detect.classes, "class ids or names, comma separated")->required();
  cmd_detect->add_option("--out", detect.out)->required();
  cmd_detect->add_flag("--skip-ungazed", detect.skip_ungazed, "only run on frames carrying gaze");
  cmd_detect->add_option("--gaze", detect.gaze);
  cmd_detect->add_option("--downsample", detect.downsample)->check(CLI::PositiveNumber);
  cmd_detect->add_option("--video-meta", detect.video_meta, "default: <video>.meta.json");
  cmd_detect->add_option("--class-manifest", detect.class_manifest, "default: ask the adapter");

  AssociateArgs assoc;
  auto* cmd_assoc = app.add_subcommand("associate", "per-frame gazed/fixated flags");
  cmd_assoc->add_option("--video-meta", assoc.video_meta)->required();
  cmd_assoc->add_option("--gaze", assoc.gaze)->required();
  cmd_assoc->add_option("--detections", assoc.detections)->required();
  cmd_assoc->add_option("--out", assoc.out)->required();
  cmd_assoc->add_option("--labels", assoc.labels);

  MetricsArgs metrics;
  auto* cmd_metrics = app.add_subcommand("metrics", "AOI metrics and transitions");
  cmd_metrics->add_option("--associations", metrics.associations)->required();
  cmd_metrics->add_option("--gaze", metrics.gaze)->required();
  cmd_metrics->add_option("--detections", metrics.detections)->required();
  cmd_metrics->add_option("--out-metrics", metrics.out_metrics)->required();
  cmd_metrics->add_option("--out-transitions", metrics.out_transitions)->required();
  cmd_metrics->add_flag("--labelled-only", metrics.labelled_only);
  cmd_metrics->add_option("--labels", metrics.labels);
  cmd_metrics->add_option("--video-meta", metrics.video_meta, "default: <detections>.meta.json");

  KeyframesArgs keyframes;
  auto* cmd_keyframes = app.add_subcommand("keyframes", "key-frames of a detection set");
  cmd_keyframes->add_option("--detections", keyframes.detections)->required();
  cmd_keyframes->add_option("--out", keyframes.out)->required();

  AnnotateArgs annotate;
  auto* cmd_annotate = app.add_subcommand("annotate", "render boxes and the fixation dot onto the video");
  cmd_annotate->add_option("--video", annotate.video)->required();
  cmd_annotate->add_option("--gaze", annotate.gaze)->required();
  cmd_annotate->add_option("--detections", annotate.detections)->required();
  cmd_annotate->add_option("--labels", annotate.labels);
  cmd_annotate->add_option("--out", annotate.out)->required();
  cmd_annotate->add_option("--video-meta", annotate.video_meta, "default: <video>.meta.json");
  cmd_annotate->add_flag("--skip-ungazed", annotate.skip_ungazed, "only encode frames carrying gaze");

  ServeArgs serve;
  auto* cmd_serve = app.add_subcommand("serve", "HTTP API for one session directory");
  cmd_serve->add_option("--session-dir", serve.session_dir)->required();
  cmd_serve->add_option("--port", serve.port, "0 picks a free port")->check(CLI::Range(0, 65535));
  cmd_serve->add_option("--host", serve.host);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("Usage", e.what(), kExitUsage);
  }

  try {
    std::optional<fs::path> cfg = opt_path(config_path);
    if (!cfg) {
      if (const char* env = std::getenv("GAZE2AOI_CONFIG"); env && *env) cfg = fs::path(env);
    }
    const auto config = load_config(cfg);
    if (cmd_detect->parsed()) return run_detect(detect, config);
    if (cmd_assoc->parsed()) return run_associate(assoc, config);
    if (cmd_metrics->parsed()) return run_metrics(metrics, config);
    if (cmd_keyframes->parsed()) return run_keyframes(keyframes, config);
    if (cmd_annotate->parsed()) return run_annotate(annotate, config);
    if (cmd_serve->parsed()) return run_serve(serve, config);
  } catch (const Error& e) {
    return report(to_string(e.code()), e.what(), exit_status(e.code()));
  } catch (const std::exception& e) {
    return report("Internal", e.what(), kExitRuntime);
  }
  return kExitUsage;
}
