#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaze2aoi {

enum class ErrorCode {
  // gaze_io
  MalformedRow,
  NonMonotoneTimestamp,
  EmptyRecording,
  UnknownSampleRate,
  InterleavedFixation,
  // det_io
  DuplicateTrackInFrame,
  InvertedBox,
  DuplicateClassId,
  DuplicateClassName,
  // detector_bridge
  EmptyClassFilter,
  UnknownClass,
  NothingToProcess,
  AdapterNotFound,
  AdapterCrashed,
  InvalidAdapterOutput,
  UnknownJob,
  // associate / metrics
  FrameOutOfRange,
  UnknownTrack,
  // keyframes / labels
  BeforeFirstKeyFrame,
  NotAKeyFrame,
  EmptyLabel,
  UnknownLabel,
  // overlay
  DecoderFailed,
  EncoderFailed,
  // service / cli
  FileUnreadable,
  ParseError,
  InvalidConfig,
  NoDetections,
  NoSession,
  SessionExists,
  Usage,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error carrying a stable machine-readable code. Thrown by every module
/// for validation and runtime failures; the CLI and HTTP layers map the
/// code onto exit statuses and response bodies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaze2aoi
