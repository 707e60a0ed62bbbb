#include "gaze2aoi/det_io.hpp"

#include <algorithm>
#include <tuple>

#include "gaze2aoi/error.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

[[noreturn]] void malformed(std::size_t row, const std::string& what) {
  throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + what);
}

void check_header(const std::vector<text::Line>& lines, std::string_view header) {
  if (lines.empty() || lines.front().content != header) {
    malformed(lines.empty() ? 1 : lines.front().number, "expected header '" + std::string(header) + "'");
  }
}

auto key(const Detection& d) { return std::tie(d.frame_no, d.track_id); }

double round_to(double v, int precision) {
  return *text::parse_double(text::format_fixed(v, precision));
}

}  // namespace

const ClassManifest::Entry* ClassManifest::find(ClassId id) const {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.class_id == id; });
  return it == entries.end() ? nullptr : &*it;
}

const ClassManifest::Entry* ClassManifest::find(std::string_view name) const {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.class_name == name; });
  return it == entries.end() ? nullptr : &*it;
}

std::vector<ClassManifest::Entry> ClassManifest::alphabetical() const {
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const Entry& a, const Entry& b) { return a.class_name < b.class_name; });
  return sorted;
}

DetectionSet parse_detections_csv(std::string_view bytes) {
  auto lines = text::split_lines(bytes);
  check_header(lines, kDetectionsCsvHeader);

  DetectionSet set;
  std::vector<std::size_t> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = lines[i].number;
    auto fields = text::split_record(lines[i].content);
    if (!fields || fields->size() != 9) malformed(row, "expected 9 fields");
    const auto& f = *fields;

    auto frame = text::parse_int(f[0]);
    auto track = text::parse_int(f[1]);
    auto cls = text::parse_int(f[2]);
    if (!frame || *frame < 0) malformed(row, "frame must be a non-negative integer");
    if (!track || *track < 0) malformed(row, "track_id must be a non-negative integer");
    if (!cls || *cls < 0) malformed(row, "class_id must be a non-negative integer");

    double coords[4];
    for (int k = 0; k < 4; ++k) {
      auto v = text::parse_double(f[4 + k]);
      if (!v) malformed(row, "box coordinate is not a number");
      coords[k] = *v;
    }
    auto conf = text::parse_double(f[8]);
    if (!conf || *conf < 0.0 || *conf > 1.0) malformed(row, "confidence must be in [0,1]");

    Detection d{*frame, *track, *cls, f[3], {coords[0], coords[1], coords[2], coords[3]}, *conf};
    if (d.box.x_min > d.box.x_max || d.box.y_min > d.box.y_max) {
      throw Error(ErrorCode::InvertedBox, "row " + std::to_string(row) + ": box min exceeds max");
    }
    set.detections.push_back(std::move(d));
    rows.push_back(row);
  }

  std::vector<std::size_t> order(set.detections.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key(set.detections[a]) < key(set.detections[b]);
  });
  std::vector<Detection> sorted;
  sorted.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& d = set.detections[order[i]];
    if (!sorted.empty() && key(sorted.back()) == key(d)) {
      throw Error(ErrorCode::DuplicateTrackInFrame,
                  "row " + std::to_string(rows[order[i]]) + ": track " + std::to_string(d.track_id) +
                      " appears twice in frame " + std::to_string(d.frame_no));
    }
    sorted.push_back(d);
  }
  set.detections = std::move(sorted);
  return set;
}

std::string write_detections_csv(const DetectionSet& set) {
  std::vector<const Detection*> rows;
  rows.reserve(set.detections.size());
  for (const auto& d : set.detections) rows.push_back(&d);
  std::sort(rows.begin(), rows.end(), [](const Detection* a, const Detection* b) { return key(*a) < key(*b); });

  std::string out(kDetectionsCsvHeader);
  out.push_back('\n');
  for (const Detection* d : rows) {
    out += std::to_string(d->frame_no);
    out.push_back(',');
    out += std::to_string(d->track_id);
    out.push_back(',');
    out += std::to_string(d->class_id);
    out.push_back(',');
    out += text::quote_field(d->class_name);
    for (double v : {d->box.x_min, d->box.y_min, d->box.x_max, d->box.y_max}) {
      out.push_back(',');
      out += text::format_trimmed(v, 2);
    }
    out.push_back(',');
    out += text::format_fixed(d->confidence, 4);
    out.push_back('\n');
  }
  return out;
}

DetectionSet canonicalize(DetectionSet set) {
  for (auto& d : set.detections) {
    d.box = {round_to(d.box.x_min, 2), round_to(d.box.y_min, 2), round_to(d.box.x_max, 2),
             round_to(d.box.y_max, 2)};
    d.confidence = round_to(d.confidence, 4);
  }
  std::sort(set.detections.begin(), set.detections.end(),
            [](const Detection& a, const Detection& b) { return key(a) < key(b); });
  return set;
}

ClassManifest parse_class_manifest(std::string_view bytes, std::string source) {
  ClassManifest manifest;
  manifest.source = std::move(source);
  auto lines = text::split_lines(bytes);
  if (lines.empty()) return manifest;
  check_header(lines, kClassManifestHeader);

  std::set<ClassId> ids;
  std::set<std::string> names;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = lines[i].number;
    auto fields = text::split_record(lines[i].content);
    if (!fields || fields->size() != 2) malformed(row, "expected 2 fields");
    auto id = text::parse_int((*fields)[0]);
    if (!id || *id < 0) malformed(row, "class_id must be a non-negative integer");
    std::string name((*fields)[1]);
    if (name.empty()) malformed(row, "class_name is empty");
    if (!ids.insert(*id).second) {
      throw Error(ErrorCode::DuplicateClassId, "row " + std::to_string(row) + ": class_id " +
                                                   std::to_string(*id) + " already defined");
    }
    if (!names.insert(name).second) {
      throw Error(ErrorCode::DuplicateClassName,
                  "row " + std::to_string(row) + ": class_name '" + name + "' already defined");
    }
    manifest.entries.push_back({*id, std::move(name)});
  }
  return manifest;
}

std::string write_class_manifest(const ClassManifest& manifest) {
  std::string out(kClassManifestHeader);
  out.push_back('\n');
  for (const auto& e : manifest.entries) {
    out += std::to_string(e.class_id);
    out.push_back(',');
    out += text::quote_field(e.class_name);
    out.push_back('\n');
  }
  return out;
}

std::set<TrackId> track_ids(const DetectionSet& set) {
  std::set<TrackId> ids;
  for (const auto& d : set.detections) ids.insert(d.track_id);
  return ids;
}

DetectionSet restrict_to_frames(const DetectionSet& set, const std::set<FrameNo>& frames) {
  DetectionSet out;
  out.video_meta = set.video_meta;
  out.class_filter = set.class_filter;
  for (const auto& d : set.detections) {
    if (frames.contains(d.frame_no)) out.detections.push_back(d);
  }
  return out;
}

}  // namespace gaze2aoi
