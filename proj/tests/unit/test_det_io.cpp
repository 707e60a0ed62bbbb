#include <doctest.h>

#include <random>

#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/error.hpp"
#include "gaze2aoi/files.hpp"
#include "support.hpp"

using namespace gaze2aoi;

namespace {

const std::string kHeader = "frame,track_id,class_id,class_name,x_min,y_min,x_max,y_max,confidence\n";

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("parse_detections_csv sorts rows by frame then track") {
  auto set = parse_detections_csv(kHeader + "2,1,0,Car,0,0,1,1,0.5\n0,7,1,\"Human face\",1,2,3,4,1\n0,3,0,Car,0,0,1,1,0\n");
  REQUIRE(set.detections.size() == 3);
  CHECK(set.detections[0].track_id == 3);
  CHECK(set.detections[1].track_id == 7);
  CHECK(set.detections[1].class_name == "Human face");
  CHECK(set.detections[1].box == Box{1, 2, 3, 4});
  CHECK(set.detections[2].frame_no == 2);
  CHECK(track_ids(set) == std::set<TrackId>{1, 3, 7});
}

TEST_CASE("parse_detections_csv validation") {
  CHECK(code_of([] { parse_detections_csv("frame,track\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,0,0,1\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_detections_csv(kHeader + "-1,1,0,Car,0,0,1,1,0.5\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,0,x,1,1,0.5\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,0,0,1,1,1.5\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,5,0,1,1,0.5\n"); }) == ErrorCode::InvertedBox);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,0,5,1,1,0.5\n"); }) == ErrorCode::InvertedBox);
  CHECK(code_of([] { parse_detections_csv(kHeader + "0,1,0,Car,0,0,1,1,0.5\n0,1,2,Hat,0,0,1,1,0.5\n"); }) ==
        ErrorCode::DuplicateTrackInFrame);
}

TEST_CASE("degenerate boxes are allowed") {
  auto set = parse_detections_csv(kHeader + "0,1,0,Car,3,3,3,3,0.5\n");
  CHECK(set.detections[0].box.area() == 0.0);
}

TEST_CASE("write_detections_csv canonical number formatting") {
  DetectionSet set;
  set.detections.push_back({0, 1, 0, "Car", {1.0, 2.5, 10.126, 20.0}, 0.87654});
  CHECK(write_detections_csv(set) == kHeader + "0,1,0,Car,1,2.5,10.13,20,0.8765\n");

  set.detections[0].confidence = 1.0;
  set.detections[0].class_name = "a,b";
  CHECK(write_detections_csv(set) == kHeader + "0,1,0,\"a,b\",1,2.5,10.13,20,1.0000\n");
}

TEST_CASE("an empty detection set serializes to the header only") {
  CHECK(write_detections_csv(DetectionSet{}) == kHeader);
  CHECK(parse_detections_csv(kHeader).detections.empty());
}

TEST_CASE("detections round-trip through the canonical form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(0, 1920);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int round = 0; round < 200; ++round) {
    DetectionSet set;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      double a = coord(rng), b = coord(rng), c = coord(rng), d = coord(rng);
      set.detections.push_back({static_cast<FrameNo>(i / 3), i % 3 + 1, static_cast<ClassId>(rng() % 5),
                                "c" + std::to_string(rng() % 5), {std::min(a, b), std::min(c, d), std::max(a, b),
                                std::max(c, d)}, unit(rng)});
    }
    auto canon = canonicalize(set);
    auto bytes = write_detections_csv(set);
    CHECK(write_detections_csv(canon) == bytes);
    auto back = parse_detections_csv(bytes);
    REQUIRE(back == canon);
    REQUIRE(write_detections_csv(back) == bytes);
  }
}

TEST_CASE("class manifest") {
  auto m = parse_class_manifest("class_id,class_name\n3,Window\n0,Car\n1,Human face\n", "test");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.source == "test");
  CHECK(m.find(ClassId{1})->class_name == "Human face");
  CHECK(m.find("Car")->class_id == 0);
  CHECK(m.find("car") == nullptr);
  auto alpha = m.alphabetical();
  CHECK(alpha[0].class_name == "Car");
  CHECK(alpha[2].class_name == "Window");
  CHECK(m.entries[0].class_name == "Window");
  CHECK(parse_class_manifest(write_class_manifest(m)).entries == m.entries);

  CHECK(code_of([] { parse_class_manifest("class_id,class_name\n1,A\n1,B\n"); }) == ErrorCode::DuplicateClassId);
  CHECK(code_of([] { parse_class_manifest("class_id,class_name\n1,A\n2,A\n"); }) == ErrorCode::DuplicateClassName);
  CHECK(code_of([] { parse_class_manifest("id,name\n"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("restrict_to_frames") {
  DetectionSet set;
  for (FrameNo n = 0; n < 5; ++n) set.detections.push_back({n, 1, 0, "Car", {0, 0, 1, 1}, 0.5});
  auto r = restrict_to_frames(set, {1, 3, 9});
  REQUIRE(r.detections.size() == 2);
  CHECK(r.detections[0].frame_no == 1);
  CHECK(r.detections[1].frame_no == 3);
}

TEST_CASE("bundled fixture detections are canonical") {
  auto bytes = read_file(support::fixture("s01_fixture_detections.csv"));
  auto set = parse_detections_csv(bytes);
  CHECK(set.detections.size() == 335);
  CHECK(write_detections_csv(set) == bytes);
  CHECK(track_ids(set) == std::set<TrackId>{1, 2, 3, 4, 5});
}
