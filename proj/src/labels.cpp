#include "gaze2aoi/labels.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <tuple>

#include <json.hpp>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"

namespace gaze2aoi {

namespace {

std::string trim_all(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

auto entry_key(const LabelEntry& e) { return std::tie(e.track_id, e.from_frame); }

std::vector<LabelEntry>::iterator find_entry(std::vector<LabelEntry>& entries, TrackId track, FrameNo from) {
  return std::lower_bound(entries.begin(), entries.end(), std::make_tuple(track, from),
                          [](const LabelEntry& e, const std::tuple<TrackId, FrameNo>& k) {
                            return entry_key(e) < std::tie(std::get<0>(k), std::get<1>(k));
                          });
}

}  // namespace

LabelStore put_label(LabelStore store, const LabelScope& scope, TrackId track, FrameNo from_frame,
                     std::string_view text, std::optional<std::string> author, std::string entered_at) {
  auto trimmed = trim_all(text);
  if (trimmed.empty()) throw Error(ErrorCode::EmptyLabel, "label text is empty");
  if (!scope.tracks.contains(track)) {
    throw Error(ErrorCode::UnknownTrack, "track " + std::to_string(track) + " is not in the active detections");
  }
  if (!scope.keyframes.contains(from_frame)) {
    throw Error(ErrorCode::NotAKeyFrame, "frame " + std::to_string(from_frame) + " is not a key-frame");
  }
  if (entered_at.empty()) entered_at = utc_timestamp_now();

  LabelEntry entry{track, from_frame, std::move(trimmed), std::move(author), std::move(entered_at)};
  auto it = find_entry(store.entries, track, from_frame);
  if (it != store.entries.end() && it->track_id == track && it->from_frame == from_frame) {
    *it = std::move(entry);
  } else {
    store.entries.insert(it, std::move(entry));
  }
  return store;
}

LabelStore delete_label(LabelStore store, TrackId track, FrameNo from_frame) {
  auto it = find_entry(store.entries, track, from_frame);
  if (it == store.entries.end() || it->track_id != track || it->from_frame != from_frame) {
    throw Error(ErrorCode::UnknownLabel, "no label for track " + std::to_string(track) + " at frame " +
                                             std::to_string(from_frame));
  }
  store.entries.erase(it);
  return store;
}

std::optional<std::string> effective_label(const LabelStore& store, TrackId track, FrameNo frame) {
  const LabelEntry* best = nullptr;
  for (const auto& e : store.entries) {
    if (e.track_id == track && e.from_frame <= frame && (!best || e.from_frame > best->from_frame)) best = &e;
  }
  if (!best) return std::nullopt;
  return best->text;
}

std::optional<std::string> latest_label(const LabelStore& store, TrackId track) {
  const LabelEntry* best = nullptr;
  for (const auto& e : store.entries) {
    if (e.track_id == track && (!best || e.from_frame > best->from_frame)) best = &e;
  }
  if (!best) return std::nullopt;
  return best->text;
}

bool has_label(const LabelStore& store, TrackId track) {
  return std::any_of(store.entries.begin(), store.entries.end(),
                     [&](const LabelEntry& e) { return e.track_id == track; });
}

std::vector<AoiMetrics> filter_unlabelled(const std::vector<AoiMetrics>& rows, const LabelStore& store) {
  std::vector<AoiMetrics> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const AoiMetrics& m) { return has_label(store, m.track_id); });
  return out;
}

LabelStore parse_labels_json(std::string_view bytes) {
  auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "label file is not a JSON object");
  LabelStore store;
  try {
    store.session_id = j.at("session_id").get<std::string>();
    for (const auto& e : j.at("entries")) {
      LabelEntry entry;
      entry.track_id = e.at("track_id").get<TrackId>();
      entry.from_frame = e.at("from_frame").get<FrameNo>();
      entry.text = e.at("text").get<std::string>();
      if (e.contains("author") && !e["author"].is_null()) entry.author = e["author"].get<std::string>();
      entry.entered_at = e.value("entered_at", std::string{});
      if (trim_all(entry.text).empty()) throw Error(ErrorCode::EmptyLabel, "label file holds an empty label");
      store.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("label file: ") + e.what());
  }
  std::stable_sort(store.entries.begin(), store.entries.end(),
                   [](const LabelEntry& a, const LabelEntry& b) { return entry_key(a) < entry_key(b); });
  auto dup = std::adjacent_find(store.entries.begin(), store.entries.end(),
                                [](const LabelEntry& a, const LabelEntry& b) { return entry_key(a) == entry_key(b); });
  if (dup != store.entries.end()) {
    throw Error(ErrorCode::ParseError, "label file has two entries for track " + std::to_string(dup->track_id) +
                                           " at frame " + std::to_string(dup->from_frame));
  }
  return store;
}

std::string write_labels_json(const LabelStore& store) {
  nlohmann::ordered_json j;
  j["session_id"] = store.session_id;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : store.entries) {
    nlohmann::ordered_json o;
    o["track_id"] = e.track_id;
    o["from_frame"] = e.from_frame;
    o["text"] = e.text;
    o["author"] = e.author ? nlohmann::ordered_json(*e.author) : nlohmann::ordered_json(nullptr);
    o["entered_at"] = e.entered_at;
    j["entries"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

LabelStore load_labels(const std::filesystem::path& path) { return parse_labels_json(read_file(path)); }

void save_labels(const std::filesystem::path& path, const LabelStore& store) {
  write_file_atomic(path, write_labels_json(store));
}

std::string utc_timestamp_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gaze2aoi
