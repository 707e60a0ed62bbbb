#include "gaze2aoi/error.hpp"

namespace gaze2aoi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::EmptyRecording: return "EmptyRecording";
    case ErrorCode::UnknownSampleRate: return "UnknownSampleRate";
    case ErrorCode::InterleavedFixation: return "InterleavedFixation";
    case ErrorCode::DuplicateTrackInFrame: return "DuplicateTrackInFrame";
    case ErrorCode::InvertedBox: return "InvertedBox";
    case ErrorCode::DuplicateClassId: return "DuplicateClassId";
    case ErrorCode::DuplicateClassName: return "DuplicateClassName";
    case ErrorCode::EmptyClassFilter: return "EmptyClassFilter";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::NothingToProcess: return "NothingToProcess";
    case ErrorCode::AdapterNotFound: return "AdapterNotFound";
    case ErrorCode::AdapterCrashed: return "AdapterCrashed";
    case ErrorCode::InvalidAdapterOutput: return "InvalidAdapterOutput";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::FrameOutOfRange: return "FrameOutOfRange";
    case ErrorCode::UnknownTrack: return "UnknownTrack";
    case ErrorCode::BeforeFirstKeyFrame: return "BeforeFirstKeyFrame";
    case ErrorCode::NotAKeyFrame: return "NotAKeyFrame";
    case ErrorCode::EmptyLabel: return "EmptyLabel";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DecoderFailed: return "DecoderFailed";
    case ErrorCode::EncoderFailed: return "EncoderFailed";
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoDetections: return "NoDetections";
    case ErrorCode::NoSession: return "NoSession";
    case ErrorCode::SessionExists: return "SessionExists";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

}  // namespace gaze2aoi
