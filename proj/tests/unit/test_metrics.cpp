#include <doctest.h>

#include "gaze2aoi/error.hpp"
#include "gaze2aoi/metrics.hpp"
#include "generator.hpp"
#include "oracle.hpp"

using namespace gaze2aoi;

namespace {

std::vector<FrameAssociation> fixated_at(TrackId track, std::initializer_list<FrameNo> fixated, FrameNo frames) {
  std::vector<FrameAssociation> rows;
  for (FrameNo n = 0; n < frames; ++n) {
    bool f = std::find(fixated.begin(), fixated.end(), n) != fixated.end();
    rows.push_back({n, track, true, f, f});
  }
  return rows;
}

}  // namespace

TEST_CASE("ttff and dwell") {
  auto rows = fixated_at(1, {25, 26, 30}, 50);
  CHECK(*compute_ttff(rows, 1, 25) == doctest::Approx(1000.0));
  auto dwell = compute_dwell(rows, 1, 25);
  CHECK(dwell.gaze_ms == doctest::Approx(120.0));
  CHECK(dwell.fix_ms == doctest::Approx(120.0));
  CHECK_FALSE(compute_ttff(fixated_at(1, {}, 10), 1, 25).has_value());
  CHECK_THROWS_AS(compute_ttff(rows, 9, 25), Error);
}

TEST_CASE("visits merge runs separated by at most gap_frames") {
  auto rows = fixated_at(1, {2, 3, 5, 9}, 20);
  CHECK(compute_visits(rows, 1, 0) == Visits{3, 2});
  CHECK(compute_visits(rows, 1, 1) == Visits{2, 1});
  CHECK(compute_visits(rows, 1, 3) == Visits{1, 0});
  CHECK(compute_visits(fixated_at(1, {}, 5), 1, 0) == Visits{0, 0});
  CHECK_THROWS_AS(compute_visits(rows, 1, -1), Error);
}

TEST_CASE("transitions skip self-transitions and include OUTSIDE") {
  std::vector<FixationAssignment> a = {{1, 1}, {2, 1}, {3, 2}, {4, std::nullopt}, {5, 1}, {6, 2}};
  auto m = compute_transitions(a, {7});
  REQUIRE(m.nodes.size() == 4);
  CHECK(m.nodes.back() == std::nullopt);
  CHECK(m.at(1, 2) == 2);
  CHECK(m.at(2, std::nullopt) == 1);
  CHECK(m.at(std::nullopt, 1) == 1);
  CHECK(m.at(1, 1) == 0);
  CHECK(m.at(7, 1) == 0);
  CHECK(m.at(42, 1) == 0);
  CHECK(m.total() == 4);
  CHECK(write_transitions_csv(m) == "from,to,count\n1,2,2\n2,OUTSIDE,1\nOUTSIDE,1,1\n");
  CHECK(write_transitions_csv(m, false) == "from,to,count\n1,2,2\n");
  CHECK(compute_transitions({}).total() == 0);
}

TEST_CASE("compute_all on a small session") {
  DetectionSet set;
  for (FrameNo n = 5; n < 10; ++n) set.detections.push_back({n, 3, 1, "Hat", {0, 0, 1, 1}, 0.5});
  std::vector<FrameAssociation> rows;
  for (FrameNo n = 5; n < 10; ++n) rows.push_back({n, 3, true, n == 6, n == 6 || n == 9});
  auto report = compute_all(rows, {{1, 3}, {2, std::nullopt}}, set, 25, 0);
  REQUIRE(report.aois.size() == 1);
  const auto& m = report.aois[0];
  CHECK(m.class_name == "Hat");
  CHECK(m.first_appearance_ms == doctest::Approx(200));
  CHECK(*m.ttff_ms == doctest::Approx(240));
  CHECK(m.dwell_gaze_ms == doctest::Approx(40));
  CHECK(m.dwell_fix_ms == doctest::Approx(80));
  CHECK(m.fixation_count == 1);
  CHECK(m.visit_count == 2);
  CHECK(m.revisit_count == 1);
  CHECK(write_metrics_csv(report.aois, [](TrackId) { return std::optional<std::string>("Oven"); }) ==
        "track_id,class_name,label,first_appearance_ms,ttff_ms,dwell_gaze_ms,dwell_fix_ms,fixation_count,"
        "visit_count,revisit_count\n3,Hat,Oven,200,240,40,80,1,2,1\n");
}

TEST_CASE("metrics CSV leaves ttff empty when never fixated and uses 3 decimals") {
  AoiMetrics m;
  m.track_id = 1;
  m.class_name = "Car";
  m.first_appearance_ms = 1000.0 / 29.97;
  m.dwell_gaze_ms = 0.5;
  auto csv = write_metrics_csv({m});
  CHECK(csv.substr(csv.find('\n') + 1) == "1,Car,,33.367,,0.5,0,0,0,0\n");
  CHECK(write_metrics_csv({}) == std::string(kMetricsCsvHeader) + "\n");
}

TEST_CASE("compute_all agrees with the per-frame oracle") {
  oracle::Generator gen(404);
  for (int i = 0; i < 300; ++i) {
    auto in = gen.instance({100, 6, 80, 20});
    auto rows = associate_frames(in.recording, in.detections, in.meta);
    auto assignments = assign_fixations(in.recording, in.detections, in.meta);
    auto report = compute_all(rows, assignments, in.detections, in.meta.fps, in.gap_frames);
    REQUIRE(report == oracle::metrics(in.recording, in.detections, in.meta, in.gap_frames));
    for (const auto& m : report.aois) {
      REQUIRE(m.dwell_fix_ms <= in.meta.duration_ms() + 1e-6);
      REQUIRE(m.revisit_count == std::max<std::int64_t>(m.visit_count - 1, 0));
      if (m.ttff_ms) REQUIRE(*m.ttff_ms >= m.first_appearance_ms);
      REQUIRE(compute_visits(rows, m.track_id, in.gap_frames).visit_count == m.visit_count);
    }
  }
}

TEST_CASE("metrics do not depend on row order") {
  oracle::Generator gen(505);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    auto in = gen.instance({80, 5, 60, 10});
    auto rows = associate_frames(in.recording, in.detections, in.meta);
    auto assignments = assign_fixations(in.recording, in.detections, in.meta);
    auto expected = compute_all(rows, assignments, in.detections, in.meta.fps, in.gap_frames);
    std::shuffle(rows.begin(), rows.end(), rng);
    REQUIRE(compute_all(rows, assignments, in.detections, in.meta.fps, in.gap_frames) == expected);
  }
}

TEST_CASE("larger gap never increases visits") {
  oracle::Generator gen(606);
  for (int i = 0; i < 100; ++i) {
    auto in = gen.instance({80, 5, 60, 10});
    auto rows = associate_frames(in.recording, in.detections, in.meta);
    for (auto t : track_ids(in.detections)) {
      std::int64_t prev = compute_visits(rows, t, 0).visit_count;
      for (int gap = 1; gap < 5; ++gap) {
        auto v = compute_visits(rows, t, gap).visit_count;
        REQUIRE(v <= prev);
        prev = v;
      }
    }
  }
}
