#pragma once

#include "guicap/errors.hpp"
#include "guicap/image.hpp"

namespace guicap {

struct PromptBox {
    Rect rect;                 // square of side s_box, inside the image
    int source_x = 0, source_y = 0;
    int s_box = 0;
};

struct PromptedFrame {
    Image annotated;   // full resolution with the green box drawn
    Image cropped;     // s_box x s_box
};

constexpr int kDefaultBoxSize = 256;
constexpr int kDefaultStrokePx = 4;

/// Cursor-centered square, shifted (never shrunk) to stay inside the image.
PromptBox prompt_box(int center_x, int center_y, int img_w, int img_h, int s_box);

/// Green outline, stroke drawn inward from the rect border. Pure outside the
/// stroke pixels; idempotent.
Image annotate(const Image& frame, const PromptBox& box, int stroke_px = kDefaultStrokePx);

Image crop(const Image& frame, const PromptBox& box);

/// Bilinear resample with half-pixel centers; identity when dims match.
Image resize_for_backend(const Image& frame, int target_w, int target_h);

/// annotate + crop in one step; the crop is taken from the raw frame, so the
/// annotation stroke never bleeds into the cropped pixels.
PromptedFrame make_prompted_frame(const Image& frame, int center_x, int center_y,
                                  int s_box = kDefaultBoxSize,
                                  int stroke_px = kDefaultStrokePx);

} // namespace guicap
