#include "gaze2aoi/associate.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "gaze2aoi/error.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

// Compressed per-frame index: items of frame n are ids[offsets[n]..offsets[n+1]).
struct FrameIndex {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;

  template <typename Emit>
  static FrameIndex build(std::size_t frame_count, std::size_t items, Emit&& spans) {
    FrameIndex index;
    index.offsets.assign(frame_count + 1, 0);
    for (std::size_t i = 0; i < items; ++i) {
      if (auto span = spans(i)) {
        for (FrameNo n = span->first; n <= span->last; ++n) ++index.offsets[n + 1];
      }
    }
    for (std::size_t n = 0; n < frame_count; ++n) index.offsets[n + 1] += index.offsets[n];
    index.ids.resize(index.offsets.back());
    auto cursor = index.offsets;
    for (std::size_t i = 0; i < items; ++i) {
      if (auto span = spans(i)) {
        for (FrameNo n = span->first; n <= span->last; ++n) index.ids[cursor[n]++] = i;
      }
    }
    return index;
  }

  std::pair<const std::size_t*, const std::size_t*> at(FrameNo n) const {
    return {ids.data() + offsets[n], ids.data() + offsets[n + 1]};
  }
};

void check_frames(const DetectionSet& detections, const VideoMeta& meta) {
  for (const auto& d : detections.detections) {
    if (d.frame_no >= meta.frame_count) {
      throw Error(ErrorCode::FrameOutOfRange, "detection of track " + std::to_string(d.track_id) +
                                                  " in frame " + std::to_string(d.frame_no) +
                                                  " beyond frame_count " +
                                                  std::to_string(meta.frame_count));
    }
  }
}

}  // namespace

bool hit_test(double px, double py, const Box& box) {
  return box.x_min <= px && px <= box.x_max && box.y_min <= py && py <= box.y_max;
}

std::optional<FrameSpan> fixation_frames(const Fixation& fixation, const VideoMeta& meta) {
  const double start = fixation.start_ms;
  const double end = fixation.end_ms();
  if (!(end > start)) return std::nullopt;
  // First frame: the one containing start. Last: the greatest n whose
  // window opens strictly before end.
  FrameNo first = time_to_frame(std::max(start, 0.0), meta.fps);
  FrameNo last = time_to_frame(end, meta.fps);
  if (frame_start_ms(last, meta.fps) >= end) --last;
  last = std::min(last, meta.frame_count - 1);
  if (end <= 0.0 || first > last) return std::nullopt;
  return FrameSpan{first, last};
}

std::vector<FrameAssociation> associate_frames(const GazeRecording& recording,
                                               const DetectionSet& detections,
                                               const VideoMeta& meta) {
  check_frames(detections, meta);
  const auto frame_count = static_cast<std::size_t>(meta.frame_count);

  auto samples = FrameIndex::build(frame_count, recording.samples.size(),
                                   [&](std::size_t i) -> std::optional<FrameSpan> {
                                     const auto& s = recording.samples[i];
                                     if (!s.valid || !s.x_px || !s.y_px) return std::nullopt;
                                     auto n = time_to_frame(s.timestamp_ms, meta.fps);
                                     if (n >= meta.frame_count) return std::nullopt;
                                     return FrameSpan{n, n};
                                   });
  auto fixations = FrameIndex::build(frame_count, recording.fixations.size(), [&](std::size_t i) {
    return fixation_frames(recording.fixations[i], meta);
  });

  std::vector<FrameAssociation> rows;
  rows.reserve(detections.detections.size());
  for (const auto& d : detections.detections) {
    FrameAssociation row{d.frame_no, d.track_id, true, false, false};
    auto [sb, se] = samples.at(d.frame_no);
    for (auto it = sb; it != se && !row.gazed; ++it) {
      const auto& s = recording.samples[*it];
      row.gazed = hit_test(*s.x_px, *s.y_px, d.box);
    }
    auto [fb, fe] = fixations.at(d.frame_no);
    for (auto it = fb; it != fe && !row.fixated; ++it) {
      const auto& f = recording.fixations[*it];
      row.fixated = hit_test(f.cx_px, f.cy_px, d.box);
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const FrameAssociation& a, const FrameAssociation& b) {
    return std::tie(a.frame_no, a.track_id) < std::tie(b.frame_no, b.track_id);
  });
  return rows;
}

std::vector<FixationAssignment> assign_fixations(const GazeRecording& recording,
                                                 const DetectionSet& detections,
                                                 const VideoMeta& meta) {
  std::multimap<FrameNo, const Detection*> by_frame;
  for (const auto& d : detections.detections) by_frame.emplace(d.frame_no, &d);

  std::vector<FixationAssignment> out;
  out.reserve(recording.fixations.size());
  for (const auto& f : recording.fixations) {
    const FrameNo mid = time_to_frame(f.start_ms + f.duration_ms / 2.0, meta.fps);
    const Detection* best = nullptr;
    auto [b, e] = by_frame.equal_range(mid);
    for (auto it = b; it != e; ++it) {
      const Detection* d = it->second;
      if (!hit_test(f.cx_px, f.cy_px, d->box)) continue;
      if (!best || d->box.area() < best->box.area() ||
          (d->box.area() == best->box.area() && d->track_id < best->track_id)) {
        best = d;
      }
    }
    out.push_back({f.fixation_id, best ? AoiTarget(best->track_id) : std::nullopt});
  }
  return out;
}

const Fixation* active_fixation(const GazeRecording& recording, FrameNo frame, const VideoMeta& meta) {
  const Fixation* active = nullptr;
  for (const auto& f : recording.fixations) {
    auto span = fixation_frames(f, meta);
    if (!span || frame < span->first || frame > span->last) continue;
    if (!active || f.start_ms > active->start_ms) active = &f;
  }
  return active;
}

std::string write_associations_csv(const std::vector<FrameAssociation>& rows,
                                   const DetectionSet& detections, const LabelLookup& labels) {
  std::map<TrackId, std::string_view> names;
  for (const auto& d : detections.detections) names.emplace(d.track_id, d.class_name);

  std::string out(kAssociationsCsvHeader);
  out.push_back('\n');
  for (const auto& r : rows) {
    out += std::to_string(r.frame_no);
    out.push_back(',');
    out += std::to_string(r.track_id);
    out.push_back(',');
    if (auto it = names.find(r.track_id); it != names.end()) out += text::quote_field(it->second);
    out += r.detected ? ",1" : ",0";
    out += r.gazed ? ",1" : ",0";
    out += r.fixated ? ",1," : ",0,";
    if (labels) {
      if (auto label = labels(r.track_id, r.frame_no)) out += text::quote_field(*label);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<FrameAssociation> parse_associations_csv(std::string_view bytes) {
  auto lines = text::split_lines(bytes);
  if (lines.empty() || lines.front().content != kAssociationsCsvHeader) {
    throw Error(ErrorCode::MalformedRow,
                "row 1: expected header '" + std::string(kAssociationsCsvHeader) + "'");
  }
  std::vector<FrameAssociation> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = text::split_record(lines[i].content);
    auto bad = [&] {
      return Error(ErrorCode::MalformedRow, "row " + std::to_string(lines[i].number) + ": bad association row");
    };
    if (!fields || fields->size() != 7) throw bad();
    const auto& f = *fields;
    auto frame = text::parse_int(f[0]);
    auto track = text::parse_int(f[1]);
    if (!frame || !track) throw bad();
    auto flag = [&](const std::string& s) {
      if (s == "1") return true;
      if (s == "0") return false;
      throw bad();
    };
    rows.push_back({*frame, *track, flag(f[3]), flag(f[4]), flag(f[5])});
  }
  return rows;
}

}  // namespace gaze2aoi
