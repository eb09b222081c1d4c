#pragma once

#include "guicap/errors.hpp"
#include "guicap/image.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace guicap {

struct CursorFix {
    int frame_idx = 0;
    int x = 0, y = 0;          // cursor center, clamped to frame bounds
    double confidence = 0.0;   // [0,1]; 0 marks an interpolated fill
};

struct CursorSprite {
    std::string id;
    int width = 0, height = 0;
    std::vector<float> gray;   // row-major, masked entries undefined
    std::vector<bool> mask;    // true where the sprite has ink
    int hotspot_x = 0, hotspot_y = 0;
};

struct CursorSpriteLibrary {
    std::vector<CursorSprite> sprites;
};

/// Library containing the arrow sprite the synthetic renderer composites.
CursorSpriteLibrary default_sprite_library();

constexpr double kDefaultMatchThreshold = 0.85;

/// Best masked normalized-cross-correlation match across sprites and scales
/// {1.0, 1.5, 2.0}. Empty optional when the best score is below threshold.
std::optional<CursorFix> detect(const Image& frame, const CursorSpriteLibrary& library,
                                double threshold = kDefaultMatchThreshold);

/// Pluggable per-frame detector, so a neural model can replace the matcher.
class CursorDetector {
public:
    virtual ~CursorDetector() = default;
    virtual std::optional<CursorFix> detect_frame(const Image& frame, int frame_idx) const = 0;
};

class TemplateMatchDetector final : public CursorDetector {
public:
    explicit TemplateMatchDetector(CursorSpriteLibrary library,
                                   double threshold = kDefaultMatchThreshold);
    std::optional<CursorFix> detect_frame(const Image& frame, int frame_idx) const override;

private:
    CursorSpriteLibrary library_;
    double threshold_;
};

/// Adapter for an external detector service: POST of the PNG frame body,
/// response one text record "x y confidence" or "NONE".
class HttpCursorDetector final : public CursorDetector {
public:
    explicit HttpCursorDetector(std::string url);
    std::optional<CursorFix> detect_frame(const Image& frame, int frame_idx) const override;

private:
    std::string host_;
    std::string path_;
};

/// One fix per frame; undetected frames are filled from the nearest detected
/// neighbor with confidence 0. Throws AllFramesUndetected when nothing hits.
std::vector<CursorFix> detect_sequence(const CursorDetector& detector,
                                       const std::vector<Image>& frames);

std::vector<CursorFix> detect_sequence(const std::vector<Image>& frames,
                                       const CursorSpriteLibrary& library,
                                       double threshold = kDefaultMatchThreshold);

} // namespace guicap
