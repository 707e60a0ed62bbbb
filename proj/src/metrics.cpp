#include "gaze2aoi/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "gaze2aoi/error.hpp"
#include "text.hpp"

namespace gaze2aoi {

namespace {

bool by_frame_track(const FrameAssociation& a, const FrameAssociation& b) {
  return std::tie(a.frame_no, a.track_id) < std::tie(b.frame_no, b.track_id);
}

// Streaming per-track accumulator; rows must arrive in frame order.
struct TrackAccumulator {
  std::int64_t gap_frames = 0;
  std::optional<FrameNo> first_fixated;
  std::optional<FrameNo> last_fixated;
  std::int64_t gazed = 0;
  std::int64_t fixated = 0;
  std::int64_t visits = 0;

  explicit TrackAccumulator(std::int64_t gap) : gap_frames(gap) {}

  void add(const FrameAssociation& row) {
    if (row.gazed) ++gazed;
    if (!row.fixated) return;
    ++fixated;
    if (!first_fixated) first_fixated = row.frame_no;
    if (!last_fixated || row.frame_no - *last_fixated - 1 > gap_frames) ++visits;
    last_fixated = row.frame_no;
  }
};

// Rows of one track in frame order, UnknownTrack when there are none.
TrackAccumulator accumulate(const std::vector<FrameAssociation>& rows, TrackId track, std::int64_t gap_frames) {
  std::vector<FrameAssociation> mine;
  for (const auto& r : rows) {
    if (r.track_id == track) mine.push_back(r);
  }
  if (mine.empty()) throw Error(ErrorCode::UnknownTrack, "no association rows for track " + std::to_string(track));
  std::sort(mine.begin(), mine.end(), by_frame_track);
  TrackAccumulator acc(gap_frames);
  for (const auto& r : mine) acc.add(r);
  return acc;
}

std::size_t node_index(const std::vector<AoiTarget>& nodes, AoiTarget target) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), target, [](AoiTarget a, AoiTarget b) {
    // OUTSIDE sorts after every track.
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace

double frames_to_ms(std::int64_t frames, double fps) { return static_cast<double>(frames) * 1000.0 / fps; }

std::int64_t TransitionMatrix::at(AoiTarget from, AoiTarget to) const {
  auto a = node_index(nodes, from);
  auto b = node_index(nodes, to);
  if (a >= nodes.size() || nodes[a] != from || b >= nodes.size() || nodes[b] != to) return 0;
  return counts[a][b];
}

std::int64_t TransitionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (auto c : row) sum += c;
  }
  return sum;
}

std::optional<double> compute_ttff(const std::vector<FrameAssociation>& rows, TrackId track, double fps) {
  auto acc = accumulate(rows, track, 0);
  if (!acc.first_fixated) return std::nullopt;
  return frames_to_ms(*acc.first_fixated, fps);
}

Dwell compute_dwell(const std::vector<FrameAssociation>& rows, TrackId track, double fps) {
  auto acc = accumulate(rows, track, 0);
  return {frames_to_ms(acc.gazed, fps), frames_to_ms(acc.fixated, fps)};
}

Visits compute_visits(const std::vector<FrameAssociation>& rows, TrackId track, std::int64_t gap_frames) {
  if (gap_frames < 0) throw Error(ErrorCode::Usage, "gap_frames must be >= 0");
  auto acc = accumulate(rows, track, gap_frames);
  return {acc.visits, std::max<std::int64_t>(acc.visits - 1, 0)};
}

TransitionMatrix compute_transitions(const std::vector<FixationAssignment>& assignments,
                                     const std::vector<TrackId>& tracks) {
  std::set<TrackId> ids(tracks.begin(), tracks.end());
  for (const auto& a : assignments) {
    if (a.target) ids.insert(*a.target);
  }
  TransitionMatrix m;
  for (auto id : ids) m.nodes.emplace_back(id);
  m.nodes.emplace_back(std::nullopt);
  m.counts.assign(m.nodes.size(), std::vector<std::int64_t>(m.nodes.size(), 0));
  for (std::size_t i = 1; i < assignments.size(); ++i) {
    const auto& from = assignments[i - 1].target;
    const auto& to = assignments[i].target;
    if (from == to) continue;
    ++m.counts[node_index(m.nodes, from)][node_index(m.nodes, to)];
  }
  return m;
}

MetricsReport compute_all(const std::vector<FrameAssociation>& rows,
                          const std::vector<FixationAssignment>& assignments,
                          const DetectionSet& detections, double fps, std::int64_t gap_frames) {
  if (gap_frames < 0) throw Error(ErrorCode::Usage, "gap_frames must be >= 0");

  // Dense track table from the detection set: first frame and class.
  std::map<TrackId, std::pair<FrameNo, const std::string*>> first_seen;
  for (const auto& d : detections.detections) {
    auto [it, inserted] = first_seen.try_emplace(d.track_id, d.frame_no, &d.class_name);
    if (!inserted && d.frame_no < it->second.first) it->second = {d.frame_no, &d.class_name};
  }
  std::vector<TrackId> tracks;
  tracks.reserve(first_seen.size());
  for (const auto& [id, _] : first_seen) tracks.push_back(id);

  auto dense = [&](TrackId id) -> std::optional<std::size_t> {
    auto it = std::lower_bound(tracks.begin(), tracks.end(), id);
    if (it == tracks.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - tracks.begin());
  };

  const std::vector<FrameAssociation>* ordered = &rows;
  std::vector<FrameAssociation> sorted;
  if (!std::is_sorted(rows.begin(), rows.end(), by_frame_track)) {
    sorted = rows;
    std::sort(sorted.begin(), sorted.end(), by_frame_track);
    ordered = &sorted;
  }

  std::vector<TrackAccumulator> acc(tracks.size(), TrackAccumulator(gap_frames));
  for (const auto& r : *ordered) {
    if (auto i = dense(r.track_id)) acc[*i].add(r);
  }

  std::vector<std::int64_t> fixation_counts(tracks.size(), 0);
  for (const auto& a : assignments) {
    if (!a.target) continue;
    if (auto i = dense(*a.target)) ++fixation_counts[*i];
  }

  MetricsReport report;
  report.aois.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& [first_frame, class_name] = first_seen[tracks[i]];
    AoiMetrics m;
    m.track_id = tracks[i];
    m.class_name = *class_name;
    m.first_appearance_ms = frames_to_ms(first_frame, fps);
    if (acc[i].first_fixated) m.ttff_ms = frames_to_ms(*acc[i].first_fixated, fps);
    m.dwell_gaze_ms = frames_to_ms(acc[i].gazed, fps);
    m.dwell_fix_ms = frames_to_ms(acc[i].fixated, fps);
    m.fixation_count = fixation_counts[i];
    m.visit_count = acc[i].visits;
    m.revisit_count = std::max<std::int64_t>(acc[i].visits - 1, 0);
    report.aois.push_back(std::move(m));
  }
  report.transitions = compute_transitions(assignments, tracks);
  return report;
}

std::string target_name(AoiTarget target) { return target ? std::to_string(*target) : "OUTSIDE"; }

std::string write_metrics_csv(const std::vector<AoiMetrics>& aois, const TrackLabelLookup& labels) {
  auto ms = [](double v) { return text::format_trimmed(v, 3); };
  std::string out(kMetricsCsvHeader);
  out.push_back('\n');
  for (const auto& m : aois) {
    out += std::to_string(m.track_id);
    out.push_back(',');
    out += text::quote_field(m.class_name);
    out.push_back(',');
    if (labels) {
      if (auto label = labels(m.track_id)) out += text::quote_field(*label);
    }
    out.push_back(',');
    out += ms(m.first_appearance_ms);
    out.push_back(',');
    if (m.ttff_ms) out += ms(*m.ttff_ms);
    out.push_back(',');
    out += ms(m.dwell_gaze_ms);
    out.push_back(',');
    out += ms(m.dwell_fix_ms);
    out.push_back(',');
    out += std::to_string(m.fixation_count);
    out.push_back(',');
    out += std::to_string(m.visit_count);
    out.push_back(',');
    out += std::to_string(m.revisit_count);
    out.push_back('\n');
  }
  return out;
}

std::string write_transitions_csv(const TransitionMatrix& matrix, bool include_outside) {
  std::string out(kTransitionsCsvHeader);
  out.push_back('\n');
  for (std::size_t a = 0; a < matrix.nodes.size(); ++a) {
    for (std::size_t b = 0; b < matrix.nodes.size(); ++b) {
      if (matrix.counts[a][b] == 0) continue;
      if (!include_outside && (!matrix.nodes[a] || !matrix.nodes[b])) continue;
      out += target_name(matrix.nodes[a]);
      out.push_back(',');
      out += target_name(matrix.nodes[b]);
      out.push_back(',');
      out += std::to_string(matrix.counts[a][b]);
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace gaze2aoi
