#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gaze2aoi/associate.hpp"
#include "gaze2aoi/config.hpp"
#include "gaze2aoi/det_io.hpp"
#include "gaze2aoi/error.hpp"
#include "gaze2aoi/gaze_io.hpp"
#include "gaze2aoi/keyframes.hpp"
#include "gaze2aoi/labels.hpp"
#include "gaze2aoi/metrics.hpp"
#include "gaze2aoi/overlay.hpp"
#include "gaze2aoi/pipeline.hpp"

namespace py = pybind11;
using namespace gaze2aoi;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaze-to-AOI engine core";

  static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type.ptr())(std::string(e.what()));
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::class_<VideoMeta>(m, "VideoMeta")
      .def(py::init([](double fps, std::int64_t width, std::int64_t height, std::int64_t frame_count) {
             return VideoMeta{fps, width, height, frame_count, std::nullopt};
           }),
           py::arg("fps"), py::arg("width"), py::arg("height"), py::arg("frame_count"))
      .def_readwrite("fps", &VideoMeta::fps)
      .def_readwrite("width", &VideoMeta::width_px)
      .def_readwrite("height", &VideoMeta::height_px)
      .def_readwrite("frame_count", &VideoMeta::frame_count)
      .def_readwrite("subject_id", &VideoMeta::subject_id)
      .def_property_readonly("duration_ms", &VideoMeta::duration_ms)
      .def(py::self == py::self)
      .def("__repr__", [](const VideoMeta& v) {
        return "VideoMeta(fps=" + std::to_string(v.fps) + ", frame_count=" + std::to_string(v.frame_count) + ")";
      });

  py::class_<GazeSample>(m, "GazeSample")
      .def(py::init([](double t, std::optional<double> x, std::optional<double> y, bool valid,
                       std::optional<FixationId> id) { return GazeSample{t, x, y, valid, id}; }),
           py::arg("timestamp_ms"), py::arg("x") = std::nullopt, py::arg("y") = std::nullopt, py::arg("valid") = true,
           py::arg("fixation_id") = std::nullopt)
      .def_readwrite("timestamp_ms", &GazeSample::timestamp_ms)
      .def_readwrite("x", &GazeSample::x_px)
      .def_readwrite("y", &GazeSample::y_px)
      .def_readwrite("valid", &GazeSample::valid)
      .def_readwrite("fixation_id", &GazeSample::fixation_id)
      .def(py::self == py::self);

  py::class_<Fixation>(m, "Fixation")
      .def(py::init([](FixationId id, double start, double duration, double cx, double cy) {
             return Fixation{id, start, duration, cx, cy};
           }),
           py::arg("fixation_id"), py::arg("start_ms"), py::arg("duration_ms"), py::arg("cx"), py::arg("cy"))
      .def_readwrite("fixation_id", &Fixation::fixation_id)
      .def_readwrite("start_ms", &Fixation::start_ms)
      .def_readwrite("duration_ms", &Fixation::duration_ms)
      .def_readwrite("cx", &Fixation::cx_px)
      .def_readwrite("cy", &Fixation::cy_px)
      .def_property_readonly("end_ms", &Fixation::end_ms)
      .def(py::self == py::self);

  py::class_<GazeRecording>(m, "GazeRecording")
      .def(py::init<>())
      .def_readwrite("subject_id", &GazeRecording::subject_id)
      .def_readwrite("samples", &GazeRecording::samples)
      .def_readwrite("fixations", &GazeRecording::fixations)
      .def_readwrite("sample_rate_hz", &GazeRecording::sample_rate_hz)
      .def(py::self == py::self);

  py::class_<Box>(m, "Box")
      .def(py::init([](double x0, double y0, double x1, double y1) { return Box{x0, y0, x1, y1}; }))
      .def_readwrite("x_min", &Box::x_min)
      .def_readwrite("y_min", &Box::y_min)
      .def_readwrite("x_max", &Box::x_max)
      .def_readwrite("y_max", &Box::y_max)
      .def_property_readonly("area", &Box::area)
      .def(py::self == py::self);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](FrameNo frame, TrackId track, ClassId cls, std::string name, Box box, double conf) {
             return Detection{frame, track, cls, std::move(name), box, conf};
           }),
           py::arg("frame"), py::arg("track_id"), py::arg("class_id"), py::arg("class_name"), py::arg("box"),
           py::arg("confidence"))
      .def_readwrite("frame", &Detection::frame_no)
      .def_readwrite("track_id", &Detection::track_id)
      .def_readwrite("class_id", &Detection::class_id)
      .def_readwrite("class_name", &Detection::class_name)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("confidence", &Detection::confidence)
      .def(py::self == py::self);

  py::class_<DetectionSet>(m, "DetectionSet")
      .def(py::init<>())
      .def_readwrite("detections", &DetectionSet::detections)
      .def_readwrite("video_meta", &DetectionSet::video_meta)
      .def("__len__", [](const DetectionSet& s) { return s.detections.size(); })
      .def(py::self == py::self);

  py::class_<FrameAssociation>(m, "FrameAssociation")
      .def_readonly("frame", &FrameAssociation::frame_no)
      .def_readonly("track_id", &FrameAssociation::track_id)
      .def_readonly("detected", &FrameAssociation::detected)
      .def_readonly("gazed", &FrameAssociation::gazed)
      .def_readonly("fixated", &FrameAssociation::fixated)
      .def(py::self == py::self);

  py::class_<FixationAssignment>(m, "FixationAssignment")
      .def_readonly("fixation_id", &FixationAssignment::fixation_id)
      .def_readonly("target", &FixationAssignment::target, "track id, or None for OUTSIDE");

  py::class_<AoiMetrics>(m, "AoiMetrics")
      .def_readonly("track_id", &AoiMetrics::track_id)
      .def_readonly("class_name", &AoiMetrics::class_name)
      .def_readonly("first_appearance_ms", &AoiMetrics::first_appearance_ms)
      .def_readonly("ttff_ms", &AoiMetrics::ttff_ms)
      .def_readonly("dwell_gaze_ms", &AoiMetrics::dwell_gaze_ms)
      .def_readonly("dwell_fix_ms", &AoiMetrics::dwell_fix_ms)
      .def_readonly("fixation_count", &AoiMetrics::fixation_count)
      .def_readonly("visit_count", &AoiMetrics::visit_count)
      .def_readonly("revisit_count", &AoiMetrics::revisit_count);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def_readonly("nodes", &TransitionMatrix::nodes)
      .def_readonly("counts", &TransitionMatrix::counts)
      .def("at", &TransitionMatrix::at, py::arg("source"), py::arg("target"))
      .def("total", &TransitionMatrix::total);

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("aois", &MetricsReport::aois)
      .def_readonly("transitions", &MetricsReport::transitions);

  py::class_<KeyFrame>(m, "KeyFrame")
      .def_readonly("frame", &KeyFrame::frame_no)
      .def_readonly("signature", &KeyFrame::signature)
      .def_readonly("track_ids", &KeyFrame::track_ids);

  py::class_<LabelEntry>(m, "LabelEntry")
      .def_readonly("track_id", &LabelEntry::track_id)
      .def_readonly("from_frame", &LabelEntry::from_frame)
      .def_readonly("text", &LabelEntry::text)
      .def_readonly("author", &LabelEntry::author)
      .def_readonly("entered_at", &LabelEntry::entered_at);

  py::class_<LabelStore>(m, "LabelStore")
      .def(py::init([](std::string session_id) { return LabelStore{std::move(session_id), {}}; }),
           py::arg("session_id") = "")
      .def_readwrite("session_id", &LabelStore::session_id)
      .def_readonly("entries", &LabelStore::entries)
      .def(py::self == py::self);

  py::enum_<DrawKind>(m, "DrawKind").value("BOX", DrawKind::Box).value("DOT", DrawKind::Dot).value("TEXT", DrawKind::Text);
  py::enum_<DrawColor>(m, "DrawColor")
      .value("GREEN", DrawColor::Green)
      .value("RED", DrawColor::Red)
      .value("PURPLE", DrawColor::Purple);

  py::class_<DrawCommand>(m, "DrawCommand")
      .def_readonly("kind", &DrawCommand::kind)
      .def_readonly("color", &DrawCommand::color)
      .def_readonly("box", &DrawCommand::box)
      .def_readonly("x", &DrawCommand::x)
      .def_readonly("y", &DrawCommand::y)
      .def_readonly("radius", &DrawCommand::radius)
      .def_readonly("caption", &DrawCommand::caption)
      .def_readonly("track_id", &DrawCommand::track_id);

  m.def("parse_gaze_csv", &parse_gaze_csv, py::arg("text"), py::arg("subject_id") = "",
        py::arg("declared_rate_hz") = std::nullopt);
  m.def("write_gaze_csv", &write_gaze_csv);
  m.def(
      "derive_fixations",
      [](const GazeRecording& r) {
        auto out = derive_fixations(r);
        return py::make_tuple(out.recording, out.warnings);
      },
      "Returns (recording, warnings).");
  m.def("apply_offset", &apply_offset, py::arg("recording"), py::arg("offset_ms"));
  m.def("prepare_gaze", [](std::string_view text, std::string subject, double offset) {
    auto out = prepare_gaze(text, std::move(subject), offset);
    return py::make_tuple(out.recording, out.warnings);
  }, py::arg("text"), py::arg("subject_id") = "", py::arg("offset_ms") = 0.0);
  m.def("frame_start_ms", &frame_start_ms);
  m.def("time_to_frame", &time_to_frame, py::arg("t_ms"), py::arg("fps"));
  m.def("frames_with_gaze", &frames_with_gaze);
  m.def("downsample", [](const GazeRecording& r, const VideoMeta& meta, std::int64_t k) {
    auto out = downsample(r, meta, k);
    return py::make_tuple(out.recording, out.meta);
  }, "Returns (recording, meta).");
  m.def("parse_video_meta_json", &parse_video_meta_json);
  m.def("write_video_meta_json", &write_video_meta_json);

  m.def("parse_detections_csv", &parse_detections_csv);
  m.def("write_detections_csv", &write_detections_csv);
  m.def("track_ids", &track_ids);

  m.def("hit_test", &hit_test);
  m.def("associate_frames", &associate_frames);
  m.def("assign_fixations", &assign_fixations);
  m.def("compute_all", &compute_all, py::arg("rows"), py::arg("assignments"), py::arg("detections"), py::arg("fps"),
        py::arg("gap_frames") = 0);
  m.def("write_metrics_csv", [](const std::vector<AoiMetrics>& rows) { return write_metrics_csv(rows); });
  m.def("write_transitions_csv", &write_transitions_csv, py::arg("matrix"), py::arg("include_outside") = true);

  m.def(
      "extract_keyframes",
      [](const DetectionSet& set, const std::string& rule) {
        auto r = parse_keyframe_rule(rule);
        if (!r) throw Error(ErrorCode::Usage, "unknown key-frame rule " + rule);
        return extract_keyframes(set, *r);
      },
      py::arg("detections"), py::arg("rule") = "signature_change");

  m.def(
      "put_label",
      [](const LabelStore& store, const std::set<TrackId>& tracks, const std::set<FrameNo>& keyframes, TrackId track,
         FrameNo from_frame, const std::string& text, std::optional<std::string> author) {
        return put_label(store, {tracks, keyframes}, track, from_frame, text, std::move(author));
      },
      py::arg("store"), py::arg("tracks"), py::arg("keyframes"), py::arg("track_id"), py::arg("from_frame"),
      py::arg("text"), py::arg("author") = std::nullopt);
  m.def("effective_label", &effective_label, py::arg("store"), py::arg("track_id"), py::arg("frame"));
  m.def("parse_labels_json", &parse_labels_json);
  m.def("write_labels_json", &write_labels_json);

  m.def("build_overlay", &build_overlay, py::arg("frame"), py::arg("associations"), py::arg("detections"),
        py::arg("recording"), py::arg("labels"), py::arg("meta"));

  m.def(
      "export_tables",
      [](const GazeRecording& rec, const DetectionSet& set, const VideoMeta& meta, const LabelStore& labels,
         std::int64_t gap_frames, bool labelled_only) {
        Config config;
        config.gap_frames = gap_frames;
        auto a = analyze(rec, set, meta, config);
        py::dict out;
        out["associations.csv"] = export_associations_csv(a.associations, set, labels);
        out["metrics.csv"] = export_metrics_csv(a.report, labels, labelled_only);
        out["transitions.csv"] = export_transitions_csv(a.report);
        return out;
      },
      py::arg("recording"), py::arg("detections"), py::arg("meta"), py::arg("labels") = LabelStore{},
      py::arg("gap_frames") = 0, py::arg("labelled_only") = false,
      "The three CSV exports, byte-identical to the CLI and HTTP service.");
}
