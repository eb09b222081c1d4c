#pragma once

#include "guicap/scene.hpp"

#include <utility>
#include <vector>

namespace guicap {

/// Transient draw state layered over the static scene during a render.
struct Overlay {
    enum class Kind { Highlight, ContextMenu, PanelSwap, FieldText, WidgetShift };
    Kind kind = Kind::Highlight;
    Rect rect;              // Highlight / ContextMenu / PanelSwap
    std::string text;       // FieldText contents
    std::string widget_id;  // FieldText / WidgetShift target
    int dx = 0, dy = 0;     // WidgetShift offset
};

struct Point {
    int x = 0, y = 0;
    bool operator==(const Point&) const = default;
};

/// Rasterize one frame. Deterministic: identical inputs give bit-identical
/// pixels. Cursor sprite is composited topmost, clipped at image edges.
Image render_scene(const GuiScene& scene, Point cursor_pos,
                   const std::vector<Overlay>& overlays);

/// Sprite used by the renderer, exposed so the grounding module can build
/// matching templates. Rows use 'B' outline, 'W' fill, '.' transparent.
const std::vector<std::string>& cursor_sprite_rows();

/// Run a scripted atomic action against the scene and record everything the
/// collection pipeline needs: frames, keylog, ground-truth caption and
/// ground-truth keyframe bracket.
GeneratedSample execute_action(const GuiScene& scene, const ActionScript& script,
                               int num_frames);

/// Ground-truth caption for a script, following the fixed per-action grammar.
std::string caption_template(const GuiScene& scene, const ActionScript& script);

struct KeylogSegment {
    std::vector<Image> frames;
    Keylog keylog;
};

/// Split a recording into single-gesture sub-videos using the keylog.
/// Mouse gestures are DOWN..UP spans (pairs closer than the double-click
/// gap merge into one gesture); key-press runs form typing gestures.
std::vector<KeylogSegment> segment_by_keylog(const std::vector<Image>& frames,
                                             const Keylog& keylog);

constexpr std::int64_t kDoubleClickGapMs = 300;
constexpr std::int64_t kTypingGapMs = 500;

} // namespace guicap
