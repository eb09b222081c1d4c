#include "guicap/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace guicap {

Image::Image(int w, int h, Color fill) : width_(w), height_(h) {
    if (w <= 0 || h <= 0)
        throw std::invalid_argument("Image: non-positive dimensions");
    px_.resize(static_cast<std::size_t>(w) * h * 3);
    this->fill(fill);
}

void Image::fill(Color c) {
    for (std::size_t i = 0; i + 2 < px_.size(); i += 3) {
        px_[i] = c.r; px_[i + 1] = c.g; px_[i + 2] = c.b;
    }
}

void Image::fill_rect(const Rect& r, Color c) {
    int x0 = std::max(0, r.x), y0 = std::max(0, r.y);
    int x1 = std::min(width_, r.x + r.w), y1 = std::min(height_, r.y + r.h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            set(x, y, c);
}

void Image::stroke_rect(const Rect& r, int stroke, Color c) {
    stroke = std::min({stroke, r.w, r.h});
    fill_rect({r.x, r.y, r.w, stroke}, c);
    fill_rect({r.x, r.y + r.h - stroke, r.w, stroke}, c);
    fill_rect({r.x, r.y, stroke, r.h}, c);
    fill_rect({r.x + r.w - stroke, r.y, stroke, r.h}, c);
}

std::array<std::uint8_t, 7> glyph_rows(char c) {
    // splitmix64 of the char code gives a stable, per-character pattern;
    // column 0 and row 0 forced on so every printable glyph marks pixels.
    std::uint64_t z = static_cast<std::uint64_t>(static_cast<unsigned char>(c)) + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    std::array<std::uint8_t, 7> rows{};
    for (int i = 0; i < 7; ++i)
        rows[i] = static_cast<std::uint8_t>((z >> (i * 8)) & 0x1f) | (i == 0 ? 0x1f : 0x01);
    return rows;
}

void Image::draw_text(int x, int y, std::string_view text, Color c, int scale) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == ' ')
            continue;
        auto rows = glyph_rows(ch);
        int gx = x + static_cast<int>(i) * kGlyphAdvance * scale;
        for (int ry = 0; ry < kGlyphHeight; ++ry)
            for (int rx = 0; rx < kGlyphWidth; ++rx)
                if (rows[ry] & (1u << rx))
                    fill_rect({gx + rx * scale, y + ry * scale, scale, scale}, c);
    }
}

std::size_t pixel_diff_count(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("pixel_diff_count: size mismatch");
    std::size_t n = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.at(x, y) != b.at(x, y))
                ++n;
    return n;
}

double mean_abs_diff(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("mean_abs_diff: size mismatch");
    double acc = 0.0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            acc += std::abs(gray_value(a.at(x, y)) - gray_value(b.at(x, y)));
    return acc / (static_cast<double>(a.width()) * a.height());
}

} // namespace guicap
