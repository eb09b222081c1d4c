#pragma once

#include <stdexcept>
#include <string>

namespace guicap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// scene_sim
struct CursorOutOfBounds : Error { using Error::Error; };
struct UnknownWidget : Error { using Error::Error; };
struct UnsupportedAction : Error { using Error::Error; };
struct MalformedKeylog : Error { using Error::Error; };

// cursor_ground
struct AllFramesUndetected : Error { using Error::Error; };

// prompting
struct BoxExceedsImage : Error { using Error::Error; };

// keyframe
struct DimensionMismatch : Error { using Error::Error; };

// caption / metric backends
struct BackendUnavailable : Error { using Error::Error; };
struct BackendRejected : Error { using Error::Error; };
struct JudgeUnparseable : Error { using Error::Error; };
struct JudgeUnavailable : Error { using Error::Error; };

// datasets
struct ManifestCorrupt : Error { using Error::Error; };

} // namespace guicap
