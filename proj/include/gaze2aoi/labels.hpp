#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/metrics.hpp"

namespace gaze2aoi {

/// A label applies to its track from `from_frame` until the next entry for
/// the same track.
struct LabelEntry {
  TrackId track_id = 0;
  FrameNo from_frame = 0;
  std::string text;
  std::optional<std::string> author;
  std::string entered_at;  // ISO-8601 UTC

  bool operator==(const LabelEntry&) const = default;
};

struct LabelStore {
  std::string session_id;
  std::vector<LabelEntry> entries;  // ordered by (track_id, from_frame)

  bool operator==(const LabelStore&) const = default;
};

/// What a label may attach to: the active tracks and key-frames.
struct LabelScope {
  std::set<TrackId> tracks;
  std::set<FrameNo> keyframes;
};

/// Upserts the entry for (track, from_frame). Text is trimmed first.
LabelStore put_label(LabelStore store, const LabelScope& scope, TrackId track, FrameNo from_frame,
                     std::string_view text, std::optional<std::string> author = std::nullopt,
                     std::string entered_at = {});

LabelStore delete_label(LabelStore store, TrackId track, FrameNo from_frame);

std::optional<std::string> effective_label(const LabelStore& store, TrackId track, FrameNo frame);

/// Text of the track's entry with the greatest from_frame.
std::optional<std::string> latest_label(const LabelStore& store, TrackId track);

bool has_label(const LabelStore& store, TrackId track);

std::vector<AoiMetrics> filter_unlabelled(const std::vector<AoiMetrics>& rows, const LabelStore& store);

LabelStore parse_labels_json(std::string_view bytes);
std::string write_labels_json(const LabelStore& store);

LabelStore load_labels(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void save_labels(const std::filesystem::path& path, const LabelStore& store);

std::string utc_timestamp_now();

}  // namespace gaze2aoi
