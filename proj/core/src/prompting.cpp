#include "guicap/prompting.hpp"

#include <algorithm>
#include <cmath>

namespace guicap {

PromptBox prompt_box(int center_x, int center_y, int img_w, int img_h, int s_box) {
    if (s_box <= 0)
        throw Error("prompt_box: s_box must be positive");
    if (center_x < 0 || center_x >= img_w || center_y < 0 || center_y >= img_h)
        throw Error("prompt_box: center outside image");
    if (s_box > img_w || s_box > img_h)
        throw BoxExceedsImage("prompt_box: s_box " + std::to_string(s_box) +
                              " exceeds image " + std::to_string(img_w) + "x" +
                              std::to_string(img_h));
    PromptBox box;
    box.rect = {std::clamp(center_x - s_box / 2, 0, img_w - s_box),
                std::clamp(center_y - s_box / 2, 0, img_h - s_box),
                s_box, s_box};
    box.source_x = center_x;
    box.source_y = center_y;
    box.s_box = s_box;
    return box;
}

Image annotate(const Image& frame, const PromptBox& box, int stroke_px) {
    if (!Rect{0, 0, frame.width(), frame.height()}.contains(box.rect))
        throw Error("annotate: box outside frame");
    Image out = frame;
    out.stroke_rect(box.rect, stroke_px, {0, 255, 0});
    return out;
}

Image crop(const Image& frame, const PromptBox& box) {
    if (!Rect{0, 0, frame.width(), frame.height()}.contains(box.rect))
        throw Error("crop: box outside frame");
    Image out(box.rect.w, box.rect.h);
    for (int y = 0; y < box.rect.h; ++y)
        for (int x = 0; x < box.rect.w; ++x)
            out.set(x, y, frame.at(box.rect.x + x, box.rect.y + y));
    return out;
}

Image resize_for_backend(const Image& frame, int target_w, int target_h) {
    if (target_w <= 0 || target_h <= 0)
        throw Error("resize_for_backend: non-positive target");
    if (target_w == frame.width() && target_h == frame.height())
        return frame;

    Image out(target_w, target_h);
    const double sx = static_cast<double>(frame.width()) / target_w;
    const double sy = static_cast<double>(frame.height()) / target_h;
    for (int y = 0; y < target_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int ya = std::clamp(y0, 0, frame.height() - 1);
        int yb = std::clamp(y0 + 1, 0, frame.height() - 1);
        for (int x = 0; x < target_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int xa = std::clamp(x0, 0, frame.width() - 1);
            int xb = std::clamp(x0 + 1, 0, frame.width() - 1);
            Color c00 = frame.at(xa, ya), c10 = frame.at(xb, ya);
            Color c01 = frame.at(xa, yb), c11 = frame.at(xb, yb);
            auto mix = [&](double a, double b, double c, double d) {
                double top = a * (1.0 - wx) + b * wx;
                double bot = c * (1.0 - wx) + d * wx;
                double v = top * (1.0 - wy) + bot * wy;
                return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
            };
            out.set(x, y, {mix(c00.r, c10.r, c01.r, c11.r),
                           mix(c00.g, c10.g, c01.g, c11.g),
                           mix(c00.b, c10.b, c01.b, c11.b)});
        }
    }
    return out;
}

PromptedFrame make_prompted_frame(const Image& frame, int center_x, int center_y,
                                  int s_box, int stroke_px) {
    PromptBox box = prompt_box(center_x, center_y, frame.width(), frame.height(), s_box);
    return {annotate(frame, box, stroke_px), crop(frame, box)};
}

} // namespace guicap
