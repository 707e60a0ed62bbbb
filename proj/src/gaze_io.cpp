#include "gaze2aoi/gaze_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "gaze2aoi/error.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

[[noreturn]] void malformed(std::size_t row, const std::string& what) {
  throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + what);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

double VideoMeta::duration_ms() const { return frame_start_ms(frame_count, fps); }

GazeRecording parse_gaze_csv(std::string_view bytes, std::string subject_id,
                             std::optional<double> declared_rate_hz) {
  auto lines = text::split_lines(bytes);
  if (lines.empty() || lines.front().content != kGazeCsvHeader) {
    malformed(lines.empty() ? 1 : lines.front().number,
              "expected header '" + std::string(kGazeCsvHeader) + "'");
  }

  GazeRecording rec;
  rec.subject_id = std::move(subject_id);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = lines[i].number;
    auto fields = text::split_record(lines[i].content);
    if (!fields || fields->size() != 5) malformed(row, "expected 5 fields");
    const auto& f = *fields;

    GazeSample s;
    auto t = text::parse_double(f[0]);
    if (!t || *t < 0.0) malformed(row, "timestamp_ms must be a non-negative number");
    s.timestamp_ms = *t;

    auto validity = text::parse_int(f[3]);
    if (!validity || (*validity != 0 && *validity != 1)) malformed(row, "validity must be 0 or 1");
    s.valid = *validity == 1;

    for (int axis = 0; axis < 2; ++axis) {
      auto cell = text::trim(f[1 + axis]);
      std::optional<double>& target = axis == 0 ? s.x_px : s.y_px;
      if (cell.empty()) {
        if (s.valid) malformed(row, "valid sample needs gaze_x and gaze_y");
        continue;
      }
      target = text::parse_double(cell);
      if (!target) malformed(row, "gaze coordinate is not a number");
    }

    if (!text::trim(f[4]).empty()) {
      auto id = text::parse_int(f[4]);
      if (!id || *id < 0) malformed(row, "fixation_id must be a non-negative integer");
      s.fixation_id = *id;
    }

    if (!rec.samples.empty() && s.timestamp_ms <= rec.samples.back().timestamp_ms) {
      throw Error(ErrorCode::NonMonotoneTimestamp,
                  "row " + std::to_string(row) + ": timestamp " + f[0] +
                      " does not increase on the previous sample");
    }
    rec.samples.push_back(std::move(s));
  }

  if (rec.samples.empty()) throw Error(ErrorCode::EmptyRecording, "gaze file has no samples");

  if (rec.samples.size() >= 2) {
    std::vector<double> rates;
    rates.reserve(rec.samples.size() - 1);
    for (std::size_t i = 1; i < rec.samples.size(); ++i) {
      rates.push_back(1000.0 / (rec.samples[i].timestamp_ms - rec.samples[i - 1].timestamp_ms));
    }
    rec.sample_rate_hz = median(std::move(rates));
  } else if (declared_rate_hz && *declared_rate_hz > 0.0) {
    rec.sample_rate_hz = *declared_rate_hz;
  } else {
    throw Error(ErrorCode::UnknownSampleRate,
                "single-sample recording needs a declared sample rate");
  }
  if (declared_rate_hz && *declared_rate_hz > 0.0) rec.sample_rate_hz = *declared_rate_hz;
  return rec;
}

std::string write_gaze_csv(const GazeRecording& recording) {
  std::string out(kGazeCsvHeader);
  out.push_back('\n');
  for (const auto& s : recording.samples) {
    out += text::format_shortest(s.timestamp_ms);
    out.push_back(',');
    if (s.x_px) out += text::format_shortest(*s.x_px);
    out.push_back(',');
    if (s.y_px) out += text::format_shortest(*s.y_px);
    out += s.valid ? ",1," : ",0,";
    if (s.fixation_id) out += std::to_string(*s.fixation_id);
    out.push_back('\n');
  }
  return out;
}

DeriveResult derive_fixations(GazeRecording recording) {
  struct Run {
    FixationId id;
    double first_ms;
    double last_ms;
    double sum_x = 0.0;
    double sum_y = 0.0;
    std::size_t valid = 0;
  };
  std::vector<Run> runs;
  std::map<FixationId, std::size_t> seen;

  for (const auto& s : recording.samples) {
    if (!s.fixation_id) continue;
    const FixationId id = *s.fixation_id;
    if (runs.empty() || runs.back().id != id) {
      if (seen.contains(id)) {
        throw Error(ErrorCode::InterleavedFixation,
                    "fixation " + std::to_string(id) + " resumes after another fixation at t=" +
                        text::format_shortest(s.timestamp_ms));
      }
      seen.emplace(id, runs.size());
      runs.push_back({id, s.timestamp_ms, s.timestamp_ms});
    }
    Run& run = runs.back();
    run.last_ms = s.timestamp_ms;
    if (s.valid && s.x_px && s.y_px) {
      run.sum_x += *s.x_px;
      run.sum_y += *s.y_px;
      ++run.valid;
    }
  }

  DeriveResult result;
  const double period_ms = recording.sample_rate_hz > 0.0 ? 1000.0 / recording.sample_rate_hz : 0.0;
  std::vector<FixationId> dropped;
  recording.fixations.clear();
  for (const auto& run : runs) {
    if (run.valid == 0) {
      result.warnings.push_back("FixationWithNoValidSamples: fixation " + std::to_string(run.id) +
                                " dropped");
      dropped.push_back(run.id);
      continue;
    }
    const auto n = static_cast<double>(run.valid);
    recording.fixations.push_back(
        {run.id, run.first_ms, run.last_ms - run.first_ms + period_ms, run.sum_x / n, run.sum_y / n});
  }
  if (!dropped.empty()) {
    for (auto& s : recording.samples) {
      if (s.fixation_id && std::find(dropped.begin(), dropped.end(), *s.fixation_id) != dropped.end()) {
        s.fixation_id.reset();
      }
    }
  }
  result.recording = std::move(recording);
  return result;
}

GazeRecording apply_offset(GazeRecording recording, double offset_ms) {
  if (offset_ms == 0.0) return recording;
  std::vector<FixationId> dropped;
  std::erase_if(recording.fixations, [&](Fixation& f) {
    f.start_ms += offset_ms;
    if (f.start_ms < 0.0) {
      dropped.push_back(f.fixation_id);
      return true;
    }
    return false;
  });
  std::erase_if(recording.samples, [&](GazeSample& s) {
    s.timestamp_ms += offset_ms;
    if (s.fixation_id && std::find(dropped.begin(), dropped.end(), *s.fixation_id) != dropped.end()) {
      s.fixation_id.reset();
    }
    return s.timestamp_ms < 0.0;
  });
  return recording;
}

double frame_start_ms(FrameNo n, double fps) { return static_cast<double>(n) * 1000.0 / fps; }

FrameNo time_to_frame(double t_ms, double fps) {
  auto n = static_cast<FrameNo>(std::floor(t_ms * fps / 1000.0));
  if (n < 0) n = 0;
  // The floor can miss by one next to a boundary; settle against the
  // window starts so membership agrees with frame_start_ms exactly.
  while (n > 0 && frame_start_ms(n, fps) > t_ms) --n;
  while (frame_start_ms(n + 1, fps) <= t_ms) ++n;
  return n;
}

std::set<FrameNo> frames_with_gaze(const GazeRecording& recording, const VideoMeta& meta) {
  std::set<FrameNo> frames;
  for (const auto& s : recording.samples) {
    if (!s.valid) continue;
    auto n = time_to_frame(s.timestamp_ms, meta.fps);
    if (n < meta.frame_count) frames.insert(frames.end(), n);
  }
  return frames;
}

Downsampled downsample(const GazeRecording& recording, const VideoMeta& meta, std::int64_t factor) {
  if (factor < 1) throw Error(ErrorCode::Usage, "downsample factor must be >= 1");
  Downsampled out{recording, meta};
  if (factor == 1) return out;
  out.meta.fps = meta.fps / static_cast<double>(factor);
  out.meta.frame_count = (meta.frame_count + factor - 1) / factor;
  // The last coarse window can reach past the video end; samples there
  // belong to no original frame and must stay unassigned.
  std::erase_if(out.recording.samples, [&](const GazeSample& s) {
    return time_to_frame(s.timestamp_ms, meta.fps) >= meta.frame_count;
  });
  // n * 1000 / (fps / k) and n * k * 1000 / fps can differ in the last bit.
  // A sample caught between the two is moved onto the side its original
  // frame lies on, so coarse frame == original frame / k holds exactly.
  for (auto& s : out.recording.samples) {
    const FrameNo coarse = time_to_frame(s.timestamp_ms, meta.fps) / factor;
    while (time_to_frame(s.timestamp_ms, out.meta.fps) > coarse) {
      s.timestamp_ms = std::nextafter(s.timestamp_ms, -INFINITY);
    }
    while (time_to_frame(s.timestamp_ms, out.meta.fps) < coarse) {
      s.timestamp_ms = std::nextafter(s.timestamp_ms, INFINITY);
    }
  }
  return out;
}

VideoMeta parse_video_meta_json(std::string_view bytes) {
  auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "video meta is not a JSON object");
  VideoMeta meta;
  try {
    meta.fps = j.at("fps").get<double>();
    meta.width_px = j.at("width").get<std::int64_t>();
    meta.height_px = j.at("height").get<std::int64_t>();
    meta.frame_count = j.at("frame_count").get<std::int64_t>();
    if (j.contains("subject_id") && !j["subject_id"].is_null()) {
      meta.subject_id = j["subject_id"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("video meta: ") + e.what());
  }
  if (!(meta.fps > 0.0) || meta.width_px < 1 || meta.height_px < 1 || meta.frame_count < 1) {
    throw Error(ErrorCode::ParseError, "video meta: fps, width, height and frame_count must be positive");
  }
  return meta;
}

std::string write_video_meta_json(const VideoMeta& meta) {
  nlohmann::ordered_json j;
  j["fps"] = meta.fps;
  j["width"] = meta.width_px;
  j["height"] = meta.height_px;
  j["frame_count"] = meta.frame_count;
  if (meta.subject_id) j["subject_id"] = *meta.subject_id;
  return j.dump(2) + "\n";
}

}  // namespace gaze2aoi
