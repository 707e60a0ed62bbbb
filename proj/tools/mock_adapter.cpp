// Model-free detector adapter. Replays a detections fixture under the
// adapter invocation contract so the engine can be exercised end to end.
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/gaze_io.hpp"

namespace fs = std::filesystem;
using namespace gaze2aoi;

int main(int argc, char** argv) {
  CLI::App app{"mock detector adapter"};
  std::string fixture, manifest, video, classes, out, skip_frames, dump_classes, fail_message = "simulated adapter failure";
  std::int64_t downsample_factor = 1;
  int fail_status = 0;
  bool garbage = false;
  app.add_option("--fixture", fixture, "detections CSV to replay (original frame numbering)");
  app.add_option("--manifest", manifest, "class manifest CSV");
  app.add_option("--fail", fail_status, "exit with this status after writing to stderr");
  app.add_option("--fail-message", fail_message);
  app.add_flag("--garbage", garbage, "write an invalid CSV and exit 0");
  app.add_option("--dump-classes", dump_classes);
  app.add_option("--video", video);
  app.add_option("--classes", classes);
  app.add_option("--out", out);
  app.add_option("--skip-frames", skip_frames);
  app.add_option("--downsample", downsample_factor)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!dump_classes.empty()) {
      write_file_atomic(dump_classes, read_file(manifest));
      return 0;
    }
    if (video.empty() || out.empty() || classes.empty()) {
      std::cerr << "mock adapter: --video, --classes and --out are required\n";
      return 64;
    }
    if (!fs::exists(video)) {
      std::cerr << "mock adapter: cannot open video " << video << "\n";
      return 3;
    }
    if (fail_status != 0) {
      std::cerr << fail_message << "\n";
      return fail_status;
    }
    std::cout << "mock adapter replaying " << fixture << std::endl;
    if (garbage) {
      write_file_atomic(out, "this is not a detections file\n");
      return 0;
    }

    std::set<ClassId> wanted;
    for (std::size_t start = 0; start <= classes.size();) {
      auto comma = classes.find(',', start);
      auto token = classes.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!token.empty()) wanted.insert(std::stoll(token));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    std::optional<std::set<FrameNo>> process;
    if (!skip_frames.empty()) {
      process.emplace();
      auto list = read_file(skip_frames);
      std::size_t pos = 0;
      while (pos < list.size()) {
        auto nl = list.find('\n', pos);
        auto line = list.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (!line.empty()) process->insert(std::stoll(line));
        if (nl == std::string::npos) break;
        pos = nl + 1;
      }
    }

    auto source = parse_detections_csv(read_file(fixture));
    FrameNo frame_count = 0;
    for (const auto& d : source.detections) frame_count = std::max(frame_count, d.frame_no + 1);
    fs::path sidecar = video + ".meta.json";
    if (fs::exists(sidecar)) frame_count = parse_video_meta_json(read_file(sidecar)).frame_count;
    const FrameNo out_frames = (frame_count + downsample_factor - 1) / downsample_factor;

    DetectionSet result;
    for (const auto& d : source.detections) {
      if (d.frame_no % downsample_factor != 0 || !wanted.contains(d.class_id)) continue;
      auto copy = d;
      copy.frame_no = d.frame_no / downsample_factor;
      if (process && !process->contains(copy.frame_no)) continue;
      result.detections.push_back(std::move(copy));
    }
    std::int64_t done = 0;
    for (FrameNo n = 0; n < out_frames; ++n) {
      if (process && !process->contains(n)) continue;
      if (++done % 10 == 0) std::cout << "{\"progress\": " << done << "}" << std::endl;
    }
    std::cout << "{\"progress\": " << done << "}" << std::endl;
    write_file_atomic(out, write_detections_csv(result));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "mock adapter: " << e.what() << "\n";
    return 2;
  }
}
