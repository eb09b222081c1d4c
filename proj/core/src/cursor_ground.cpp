#include "guicap/cursor_ground.hpp"

#include "guicap/png_io.hpp"
#include "guicap/scene_sim.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace guicap {
namespace {

std::vector<float> to_gray(const Image& img) {
    std::vector<float> g(static_cast<std::size_t>(img.width()) * img.height());
    const auto& px = img.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t p = i * 3;
        g[i] = (static_cast<float>(px[p]) + px[p + 1] + px[p + 2]) / 3.0f;
    }
    return g;
}

CursorSprite scale_sprite(const CursorSprite& s, double scale) {
    if (scale == 1.0)
        return s;
    CursorSprite out;
    out.id = s.id;
    out.width = std::max(1, static_cast<int>(std::lround(s.width * scale)));
    out.height = std::max(1, static_cast<int>(std::lround(s.height * scale)));
    out.gray.resize(static_cast<std::size_t>(out.width) * out.height);
    out.mask.resize(out.gray.size());
    for (int y = 0; y < out.height; ++y) {
        int sy = std::min(s.height - 1, static_cast<int>(y / scale));
        for (int x = 0; x < out.width; ++x) {
            int sx = std::min(s.width - 1, static_cast<int>(x / scale));
            std::size_t di = static_cast<std::size_t>(y) * out.width + x;
            std::size_t si = static_cast<std::size_t>(sy) * s.width + sx;
            out.gray[di] = s.gray[si];
            out.mask[di] = s.mask[si];
        }
    }
    out.hotspot_x = static_cast<int>(std::lround(s.hotspot_x * scale));
    out.hotspot_y = static_cast<int>(std::lround(s.hotspot_y * scale));
    return out;
}

struct Match {
    double score = -2.0;
    int x = 0, y = 0; // center after hotspot offset
};

/// Zero-mean NCC restricted to the sprite mask; score 0 on flat windows.
void match_sprite(const std::vector<float>& gray, int fw, int fh,
                  const CursorSprite& t, Match& best) {
    if (t.width > fw || t.height > fh)
        return;
    struct MaskPx { int dx, dy; float tc; };
    std::vector<MaskPx> pts;
    double tsum = 0.0;
    int m = 0;
    for (int y = 0; y < t.height; ++y)
        for (int x = 0; x < t.width; ++x)
            if (t.mask[static_cast<std::size_t>(y) * t.width + x]) {
                tsum += t.gray[static_cast<std::size_t>(y) * t.width + x];
                ++m;
            }
    if (m < 4)
        return;
    const double tmean = tsum / m;
    double tnorm2 = 0.0;
    for (int y = 0; y < t.height; ++y)
        for (int x = 0; x < t.width; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * t.width + x;
            if (t.mask[i]) {
                float tc = static_cast<float>(t.gray[i] - tmean);
                pts.push_back({x, y, tc});
                tnorm2 += static_cast<double>(tc) * tc;
            }
        }
    if (tnorm2 <= 0.0)
        return;

    // Cheap prefilter: NCC over a spread subset of mask points. A genuine
    // match scores ~1 on any subset, so skipping low-scoring windows only
    // prunes background; the full correlation still decides acceptance.
    std::vector<MaskPx> sub;
    const int stride = std::max(1, static_cast<int>(pts.size()) / 24);
    double sub_sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); i += stride) {
        sub.push_back(pts[i]);
        sub_sum += pts[i].tc + tmean;
    }
    const int sm = static_cast<int>(sub.size());
    const double sub_mean = sub_sum / sm;
    double sub_norm2 = 0.0;
    for (auto& p : sub) {
        p.tc = static_cast<float>(p.tc + tmean - sub_mean);
        sub_norm2 += static_cast<double>(p.tc) * p.tc;
    }
    const bool prefilter = sm >= 8 && sm < m && sub_norm2 > 0.0;

    for (int py = 0; py + t.height <= fh; ++py) {
        for (int px = 0; px + t.width <= fw; ++px) {
            if (prefilter) {
                double ssum = 0.0, ssum2 = 0.0, scross = 0.0;
                for (const auto& p : sub) {
                    float f = gray[static_cast<std::size_t>(py + p.dy) * fw + (px + p.dx)];
                    ssum += f;
                    ssum2 += static_cast<double>(f) * f;
                    scross += static_cast<double>(f) * p.tc;
                }
                double svar = ssum2 - ssum * ssum / sm;
                if (svar <= 1e-9 || scross / std::sqrt(svar * sub_norm2) < 0.6)
                    continue;
            }
            double fsum = 0.0, fsum2 = 0.0, cross = 0.0;
            for (const auto& p : pts) {
                float f = gray[static_cast<std::size_t>(py + p.dy) * fw + (px + p.dx)];
                fsum += f;
                fsum2 += static_cast<double>(f) * f;
                cross += static_cast<double>(f) * p.tc;
            }
            double fvar = fsum2 - fsum * fsum / m;
            if (fvar <= 1e-9)
                continue;
            double score = cross / std::sqrt(fvar * tnorm2);
            if (score > best.score) {
                best.score = score;
                best.x = px + t.hotspot_x;
                best.y = py + t.hotspot_y;
            }
        }
    }
}

} // namespace

CursorSpriteLibrary default_sprite_library() {
    const auto& rows = cursor_sprite_rows();
    CursorSprite s;
    s.id = "arrow";
    s.height = static_cast<int>(rows.size());
    s.width = static_cast<int>(rows[0].size());
    s.gray.resize(static_cast<std::size_t>(s.width) * s.height, 0.0f);
    s.mask.resize(s.gray.size(), false);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            char c = rows[y][x];
            if (c == '.')
                continue;
            std::size_t i = static_cast<std::size_t>(y) * s.width + x;
            s.mask[i] = true;
            s.gray[i] = (c == 'B') ? 0.0f : 255.0f;
        }
    s.hotspot_x = 0;
    s.hotspot_y = 0;
    return CursorSpriteLibrary{{std::move(s)}};
}

std::optional<CursorFix> detect(const Image& frame, const CursorSpriteLibrary& library,
                                double threshold) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw Error("detect: threshold must be in (0,1]");
    if (library.sprites.empty())
        throw Error("detect: empty sprite library");
    std::vector<float> gray = to_gray(frame);
    Match best;
    for (const auto& sprite : library.sprites)
        for (double scale : {1.0, 1.5, 2.0})
            match_sprite(gray, frame.width(), frame.height(), scale_sprite(sprite, scale), best);
    if (best.score < threshold)
        return std::nullopt;
    CursorFix fix;
    fix.x = std::clamp(best.x, 0, frame.width() - 1);
    fix.y = std::clamp(best.y, 0, frame.height() - 1);
    fix.confidence = std::min(1.0, best.score);
    return fix;
}

TemplateMatchDetector::TemplateMatchDetector(CursorSpriteLibrary library, double threshold)
    : library_(std::move(library)), threshold_(threshold) {}

std::optional<CursorFix> TemplateMatchDetector::detect_frame(const Image& frame,
                                                             int frame_idx) const {
    auto fix = detect(frame, library_, threshold_);
    if (fix)
        fix->frame_idx = frame_idx;
    return fix;
}

HttpCursorDetector::HttpCursorDetector(std::string url) {
    auto pos = url.find('/', url.find("//") == std::string::npos ? 0 : url.find("//") + 2);
    if (pos == std::string::npos) {
        host_ = url;
        path_ = "/";
    } else {
        host_ = url.substr(0, pos);
        path_ = url.substr(pos);
    }
}

std::optional<CursorFix> HttpCursorDetector::detect_frame(const Image& frame,
                                                          int frame_idx) const {
    httplib::Client client(host_);
    client.set_read_timeout(30, 0);
    auto res = client.Post(path_, encode_png(frame), "image/png");
    if (!res)
        throw BackendUnavailable("cursor detector unreachable: " + host_);
    if (res->status != 200)
        throw BackendRejected("cursor detector HTTP " + std::to_string(res->status));
    std::istringstream in(res->body);
    std::string first;
    in >> first;
    if (first == "NONE" || first.empty())
        return std::nullopt;
    CursorFix fix;
    fix.frame_idx = frame_idx;
    fix.x = std::stoi(first);
    in >> fix.y >> fix.confidence;
    fix.x = std::clamp(fix.x, 0, frame.width() - 1);
    fix.y = std::clamp(fix.y, 0, frame.height() - 1);
    return fix;
}

std::vector<CursorFix> detect_sequence(const CursorDetector& detector,
                                       const std::vector<Image>& frames) {
    if (frames.empty())
        throw Error("detect_sequence: no frames");
    std::vector<std::optional<CursorFix>> raw(frames.size());
    bool any = false;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        raw[i] = detector.detect_frame(frames[i], static_cast<int>(i));
        any = any || raw[i].has_value();
    }
    if (!any)
        throw AllFramesUndetected("detect_sequence: cursor not found in any frame");

    std::vector<CursorFix> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (raw[i]) {
            out[i] = *raw[i];
            continue;
        }
        // Nearest detected neighbor; previous frame wins ties.
        std::size_t best = frames.size();
        std::size_t best_dist = frames.size() + 1;
        for (std::size_t j = 0; j < frames.size(); ++j) {
            if (!raw[j])
                continue;
            std::size_t dist = i > j ? i - j : j - i;
            if (dist < best_dist || (dist == best_dist && j < i)) {
                best_dist = dist;
                best = j;
            }
        }
        out[i] = *raw[best];
        out[i].frame_idx = static_cast<int>(i);
        out[i].confidence = 0.0;
    }
    return out;
}

std::vector<CursorFix> detect_sequence(const std::vector<Image>& frames,
                                       const CursorSpriteLibrary& library,
                                       double threshold) {
    return detect_sequence(TemplateMatchDetector(library, threshold), frames);
}

} // namespace guicap
