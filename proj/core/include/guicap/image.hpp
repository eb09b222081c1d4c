#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace guicap {

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Color&) const = default;
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;

    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool contains(const Rect& o) const {
        return o.x >= x && o.y >= y && o.x + o.w <= x + w && o.y + o.h <= y + h;
    }
    int cx() const { return x + w / 2; }
    int cy() const { return y + h / 2; }
    bool operator==(const Rect&) const = default;
};

/// Plain RGB8 raster with value semantics. All drawing ops clip to bounds.
class Image {
public:
    Image() = default;
    Image(int w, int h, Color fill = {0, 0, 0});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    Color at(int x, int y) const {
        const std::uint8_t* p = &px_[3 * (static_cast<std::size_t>(y) * width_ + x)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Color c) {
        std::uint8_t* p = &px_[3 * (static_cast<std::size_t>(y) * width_ + x)];
        p[0] = c.r; p[1] = c.g; p[2] = c.b;
    }

    const std::vector<std::uint8_t>& data() const { return px_; }
    std::vector<std::uint8_t>& data() { return px_; }

    void fill(Color c);
    void fill_rect(const Rect& r, Color c);
    /// Outline drawn inward from the rect border.
    void stroke_rect(const Rect& r, int stroke, Color c);
    /// Monospaced procedural bitmap text, glyph cell 6x8 per scale unit.
    void draw_text(int x, int y, std::string_view text, Color c, int scale = 1);

    bool operator==(const Image&) const = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> px_;
};

/// Luma in [0,255] as a double; equal-weight so a global offset on all
/// channels shifts gray by the same offset.
inline double gray_value(Color c) {
    return (static_cast<double>(c.r) + c.g + c.b) / 3.0;
}

/// Count of pixels that differ between two same-sized images.
std::size_t pixel_diff_count(const Image& a, const Image& b);

/// Mean absolute gray difference between two same-sized images.
double mean_abs_diff(const Image& a, const Image& b);

constexpr int kGlyphWidth = 5;
constexpr int kGlyphHeight = 7;
constexpr int kGlyphAdvance = 6;

/// Deterministic 5x7 glyph pattern for a character; row bits, LSB = left.
std::array<std::uint8_t, 7> glyph_rows(char c);

} // namespace guicap
