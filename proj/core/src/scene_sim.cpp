#include "guicap/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace guicap {
namespace {

constexpr Color kPanelFill{74, 76, 84};
constexpr Color kPanelBorder{110, 112, 120};
constexpr Color kWidgetBorder{24, 24, 28};
constexpr Color kLabelInk{235, 235, 235};
constexpr Color kHighlight{255, 200, 60};
constexpr Color kMenuFill{240, 240, 238};
constexpr Color kMenuInk{40, 40, 40};
constexpr Color kSwapA{96, 60, 120};
constexpr Color kSwapB{60, 96, 120};
constexpr Color kFieldInk{20, 20, 20};

Color widget_fill(WidgetKind k) {
    switch (k) {
        case WidgetKind::Button: return {92, 120, 180};
        case WidgetKind::Icon: return {120, 150, 96};
        case WidgetKind::MenuItem: return {100, 100, 110};
        case WidgetKind::TextField: return {228, 228, 224};
        case WidgetKind::Handle: return {200, 140, 60};
    }
    return {128, 128, 128};
}

void draw_widget(Image& img, const Widget& w, Rect at) {
    img.fill_rect(at, widget_fill(w.kind));
    img.stroke_rect(at, 1, kWidgetBorder);
    Color ink = (w.kind == WidgetKind::TextField) ? kFieldInk : kLabelInk;
    img.draw_text(at.x + 3, at.y + std::max(2, (at.h - kGlyphHeight) / 2),
                  w.label, ink);
}

void draw_cursor(Image& img, Point pos) {
    const auto& rows = cursor_sprite_rows();
    for (int ry = 0; ry < static_cast<int>(rows.size()); ++ry) {
        for (int rx = 0; rx < static_cast<int>(rows[ry].size()); ++rx) {
            char c = rows[ry][rx];
            if (c == '.')
                continue;
            int x = pos.x + rx, y = pos.y + ry;
            if (img.in_bounds(x, y))
                img.set(x, y, c == 'B' ? Color{0, 0, 0} : Color{255, 255, 255});
        }
    }
}

Rect context_menu_rect(const GuiScene& scene, Point anchor) {
    constexpr int kMenuW = 120, kMenuH = 90;
    int x = std::clamp(anchor.x, 0, std::max(0, scene.width - kMenuW));
    int y = std::clamp(anchor.y, 0, std::max(0, scene.height - kMenuH));
    return {x, y, std::min(kMenuW, scene.width), std::min(kMenuH, scene.height)};
}

} // namespace

const std::vector<std::string>& cursor_sprite_rows() {
    static const std::vector<std::string> rows = {
        "B..........",
        "BB.........",
        "BWB........",
        "BWWB.......",
        "BWWWB......",
        "BWWWWB.....",
        "BWWWWWB....",
        "BWWWWWWB...",
        "BWWWWWWWB..",
        "BWWWWWWWWB.",
        "BWWWWWBBBBB",
        "BWWBWWB....",
        "BWB.BWWB...",
        "BB..BWWB...",
        "B....BWWB..",
        ".....BWWB..",
        "......BB...",
    };
    return rows;
}

Image render_scene(const GuiScene& scene, Point cursor_pos,
                   const std::vector<Overlay>& overlays) {
    scene.validate();
    if (cursor_pos.x < 0 || cursor_pos.x >= scene.width ||
        cursor_pos.y < 0 || cursor_pos.y >= scene.height)
        throw CursorOutOfBounds("cursor (" + std::to_string(cursor_pos.x) + "," +
                                std::to_string(cursor_pos.y) + ") outside scene");

    Image img(scene.width, scene.height, scene.background);

    for (const auto& p : scene.panels) {
        img.fill_rect(p.rect, kPanelFill);
        img.stroke_rect(p.rect, 1, kPanelBorder);
        img.draw_text(p.rect.x + 3, p.rect.y + 3, p.name, kPanelBorder);
    }

    // Widgets displaced by a WidgetShift overlay are drawn at their offset
    // position instead of in place.
    auto shift_of = [&](const std::string& id) -> const Overlay* {
        for (const auto& o : overlays)
            if (o.kind == Overlay::Kind::WidgetShift && o.widget_id == id)
                return &o;
        return nullptr;
    };

    for (const auto& w : scene.widgets) {
        Rect at = w.rect;
        if (const Overlay* s = shift_of(w.id)) {
            at.x += s->dx;
            at.y += s->dy;
        }
        draw_widget(img, w, at);
    }

    for (const auto& o : overlays) {
        switch (o.kind) {
            case Overlay::Kind::Highlight:
                img.fill_rect(o.rect, kHighlight);
                break;
            case Overlay::Kind::ContextMenu: {
                img.fill_rect(o.rect, kMenuFill);
                img.stroke_rect(o.rect, 1, kMenuInk);
                int rowh = std::max(10, o.rect.h / 4);
                for (int i = 1; i * rowh < o.rect.h; ++i)
                    img.fill_rect({o.rect.x + 4, o.rect.y + i * rowh, o.rect.w - 8, 1}, kMenuInk);
                break;
            }
            case Overlay::Kind::PanelSwap:
                for (int y = 0; y < o.rect.h; ++y)
                    img.fill_rect({o.rect.x, o.rect.y + y, o.rect.w, 1},
                                  (y / 8) % 2 == 0 ? kSwapA : kSwapB);
                break;
            case Overlay::Kind::FieldText: {
                const Widget* w = scene.find_widget(o.widget_id);
                if (w)
                    img.draw_text(w->rect.x + 3 + (static_cast<int>(w->label.size()) + 1) * kGlyphAdvance,
                                  w->rect.y + std::max(2, (w->rect.h - kGlyphHeight) / 2),
                                  o.text, kFieldInk);
                break;
            }
            case Overlay::Kind::WidgetShift:
                break; // handled in the widget pass
        }
    }

    draw_cursor(img, cursor_pos);
    return img;
}

std::string caption_template(const GuiScene& scene, const ActionScript& script) {
    const Widget* w = scene.find_widget(script.target_widget);
    if (!w)
        throw UnknownWidget("caption_template: no widget '" + script.target_widget + "'");
    switch (script.action) {
        case ActionType::LeftClick:
            return "Left-Click on " + w->label + " " + to_string(w->kind);
        case ActionType::RightClick:
            return "Right-Click on " + w->label + " " + to_string(w->kind);
        case ActionType::DoubleClick:
            return "Double-Click on " + w->label + " " + to_string(w->kind);
        case ActionType::Drag:
            return "Drag the " + w->label + " from " + script.drag_from + " to " +
                   script.drag_to + " to " + script.purpose;
        case ActionType::Type:
            return "Type '" + script.typed_text + "' in " + w->label + " " +
                   to_string(w->kind);
    }
    throw UnsupportedAction("caption_template: unknown action");
}

GeneratedSample execute_action(const GuiScene& scene, const ActionScript& script,
                               int num_frames) {
    scene.validate();
    if (num_frames < 4)
        throw UnsupportedAction("execute_action: num_frames must be >= 4");
    const Widget* target = scene.find_widget(script.target_widget);
    if (!target)
        throw UnknownWidget("execute_action: no widget '" + script.target_widget + "'");

    const bool is_drag = script.action == ActionType::Drag;
    const bool is_type = script.action == ActionType::Type;
    if (is_drag != (!script.drag_from.empty() && !script.drag_to.empty()))
        throw UnsupportedAction("execute_action: drag panels present iff action is Drag");
    if (is_type != !script.typed_text.empty())
        throw UnsupportedAction("execute_action: typed_text present iff action is Type");

    const Panel* from_panel = nullptr;
    const Panel* to_panel = nullptr;
    if (is_drag) {
        from_panel = scene.find_panel(script.drag_from);
        to_panel = scene.find_panel(script.drag_to);
        if (!from_panel || !to_panel)
            throw UnsupportedAction("execute_action: unknown drag panel");
        if (!from_panel->rect.contains(target->rect.cx(), target->rect.cy()))
            throw UnsupportedAction("execute_action: drag target not inside '" +
                                    script.drag_from + "'");
    }

    const int F = num_frames;
    Point target_pt{target->rect.cx(), target->rect.cy()};

    // Tail = frames the effect occupies after act_start; the ground-truth
    // bracket must close strictly before the last frame index.
    int tail_min = 0;
    switch (script.action) {
        case ActionType::LeftClick: tail_min = 1; break;
        case ActionType::RightClick:
        case ActionType::DoubleClick: tail_min = 0; break;
        case ActionType::Drag: tail_min = 2; break;
        case ActionType::Type: tail_min = 1; break;
    }
    const int max_act = F - 1 - tail_min;
    if (max_act < 1)
        throw UnsupportedAction("execute_action: num_frames too small for action");

    std::mt19937_64 rng(script.seed);
    Point start{
        static_cast<int>(std::uniform_int_distribution<int>(0, scene.width - 1)(rng)),
        static_cast<int>(std::uniform_int_distribution<int>(0, scene.height - 1)(rng))};
    const int d_cap = std::max(0, std::min(F / 3 - 1, max_act - 2));
    const int delay = std::uniform_int_distribution<int>(0, d_cap)(rng);
    const int act_start = std::clamp(2 * F / 5, delay + 1, max_act);

    int effect_len = 0; // frames carrying visible effect development
    int chars_per_frame = 1;
    switch (script.action) {
        case ActionType::LeftClick:
            effect_len = std::min(3, F - 1 - act_start);
            break;
        case ActionType::Drag:
            effect_len = std::min(std::max(2, F / 4), F - 1 - act_start);
            break;
        case ActionType::Type: {
            int len = static_cast<int>(script.typed_text.size());
            int max_typing = F - 1 - act_start;
            chars_per_frame = (len + max_typing - 1) / max_typing;
            effect_len = (len + chars_per_frame - 1) / chars_per_frame;
            break;
        }
        default:
            break;
    }

    Point drop_pt = is_drag ? Point{to_panel->rect.cx(), to_panel->rect.cy()} : target_pt;
    const int drop_frame = act_start + effect_len;

    auto lerp = [](int a, int b, int num, int den) {
        return a + static_cast<int>(std::lround(static_cast<double>(b - a) * num / den));
    };
    auto cursor_at = [&](int i) -> Point {
        if (i <= delay)
            return start;
        if (i < act_start)
            return {lerp(start.x, target_pt.x, i - delay, act_start - delay),
                    lerp(start.y, target_pt.y, i - delay, act_start - delay)};
        if (is_drag && i > act_start)
            return {lerp(target_pt.x, drop_pt.x, std::min(i, drop_frame) - act_start, effect_len),
                    lerp(target_pt.y, drop_pt.y, std::min(i, drop_frame) - act_start, effect_len)};
        return target_pt;
    };

    GeneratedSample sample;
    sample.action_class = script.action;
    sample.scene_snapshot = scene;
    sample.gt_caption = caption_template(scene, script);

    const int text_len = static_cast<int>(script.typed_text.size());
    for (int i = 0; i < F; ++i) {
        std::vector<Overlay> overlays;
        switch (script.action) {
            case ActionType::LeftClick:
                if (i >= act_start && i < act_start + effect_len)
                    overlays.push_back({Overlay::Kind::Highlight, target->rect, "", "", 0, 0});
                break;
            case ActionType::RightClick:
                if (i >= act_start)
                    overlays.push_back({Overlay::Kind::ContextMenu,
                                        context_menu_rect(scene, target_pt), "", "", 0, 0});
                break;
            case ActionType::DoubleClick:
                if (i >= act_start)
                    overlays.push_back({Overlay::Kind::PanelSwap,
                                        {scene.width / 4, scene.height / 4,
                                         scene.width / 2, scene.height / 2},
                                        "", "", 0, 0});
                break;
            case ActionType::Drag:
                if (i > act_start) {
                    Point c = cursor_at(i);
                    overlays.push_back({Overlay::Kind::WidgetShift, {}, "", target->id,
                                        c.x - target_pt.x, c.y - target_pt.y});
                }
                break;
            case ActionType::Type:
                if (i >= act_start) {
                    int shown = std::min(text_len, (i - act_start + 1) * chars_per_frame);
                    overlays.push_back({Overlay::Kind::FieldText, {},
                                        script.typed_text.substr(0, shown), target->id, 0, 0});
                }
                break;
        }
        sample.frames.push_back(render_scene(scene, cursor_at(i), overlays));
    }

    // Keylog
    Keylog& log = sample.keylog;
    for (int i = delay + 1; i < act_start; ++i) {
        Point c = cursor_at(i);
        log.entries.push_back({i * kMsPerFrame, KeyKind::MouseMove, c.x, c.y, ""});
    }
    const std::int64_t t0 = act_start * kMsPerFrame;
    switch (script.action) {
        case ActionType::LeftClick:
        case ActionType::RightClick:
            log.entries.push_back({t0, KeyKind::MouseDown, target_pt.x, target_pt.y, ""});
            log.entries.push_back({t0 + 40, KeyKind::MouseUp, target_pt.x, target_pt.y, ""});
            break;
        case ActionType::DoubleClick:
            log.entries.push_back({t0, KeyKind::MouseDown, target_pt.x, target_pt.y, ""});
            log.entries.push_back({t0 + 30, KeyKind::MouseUp, target_pt.x, target_pt.y, ""});
            log.entries.push_back({t0 + 60, KeyKind::MouseDown, target_pt.x, target_pt.y, ""});
            log.entries.push_back({t0 + 90, KeyKind::MouseUp, target_pt.x, target_pt.y, ""});
            break;
        case ActionType::Drag: {
            log.entries.push_back({t0, KeyKind::MouseDown, target_pt.x, target_pt.y, ""});
            for (int i = act_start + 1; i < drop_frame; ++i) {
                Point c = cursor_at(i);
                log.entries.push_back({i * kMsPerFrame, KeyKind::MouseMove, c.x, c.y, ""});
            }
            log.entries.push_back({drop_frame * kMsPerFrame, KeyKind::MouseUp,
                                   drop_pt.x, drop_pt.y, ""});
            break;
        }
        case ActionType::Type:
            for (int j = 0; j < text_len; ++j) {
                int frame = act_start + j / chars_per_frame;
                log.entries.push_back({frame * kMsPerFrame + (j % chars_per_frame) * 10,
                                       KeyKind::KeyPress, 0, 0,
                                       std::string(1, script.typed_text[j])});
            }
            break;
    }

    switch (script.action) {
        case ActionType::LeftClick:
            sample.gt_start = act_start - 1;
            sample.gt_end = act_start + effect_len;
            break;
        case ActionType::RightClick:
        case ActionType::DoubleClick:
            sample.gt_start = act_start - 1;
            sample.gt_end = act_start;
            break;
        case ActionType::Drag:
            sample.gt_start = act_start;
            sample.gt_end = drop_frame;
            break;
        case ActionType::Type:
            // Last new glyphs land on frame act_start + effect_len - 1.
            sample.gt_start = act_start - 1;
            sample.gt_end = std::max(act_start, act_start + effect_len - 1);
            break;
    }
    return sample;
}

std::vector<KeylogSegment> segment_by_keylog(const std::vector<Image>& frames,
                                             const Keylog& keylog) {
    struct Gesture {
        std::int64_t start = 0, end = 0;
        bool typing = false;
    };
    std::vector<Gesture> gestures;
    bool mouse_open = false;
    std::int64_t open_start = 0;

    const std::int64_t horizon = static_cast<std::int64_t>(frames.size()) * kMsPerFrame;
    for (const auto& e : keylog.entries) {
        if (e.timestamp_ms >= horizon)
            throw MalformedKeylog("keylog timestamp beyond recording");
        switch (e.kind) {
            case KeyKind::MouseDown:
                if (mouse_open)
                    throw MalformedKeylog("MOUSE_DOWN while button already down");
                if (!gestures.empty() && !gestures.back().typing &&
                    e.timestamp_ms - gestures.back().end <= kDoubleClickGapMs) {
                    mouse_open = true; // merges into the previous gesture (double click)
                    open_start = gestures.back().start;
                    gestures.pop_back();
                } else {
                    mouse_open = true;
                    open_start = e.timestamp_ms;
                }
                break;
            case KeyKind::MouseUp:
                if (!mouse_open)
                    throw MalformedKeylog("MOUSE_UP without MOUSE_DOWN");
                gestures.push_back({open_start, e.timestamp_ms, false});
                mouse_open = false;
                break;
            case KeyKind::KeyPress:
                if (!gestures.empty() && gestures.back().typing && !mouse_open &&
                    e.timestamp_ms - gestures.back().end <= kTypingGapMs)
                    gestures.back().end = e.timestamp_ms;
                else
                    gestures.push_back({e.timestamp_ms, e.timestamp_ms, true});
                break;
            case KeyKind::MouseMove:
                if (mouse_open)
                    open_start = std::min(open_start, e.timestamp_ms);
                break;
        }
    }
    if (mouse_open)
        throw MalformedKeylog("MOUSE_DOWN without matching MOUSE_UP");
    if (gestures.empty())
        return {};

    std::vector<KeylogSegment> out;
    const int last_frame = static_cast<int>(frames.size()) - 1;
    int seg_begin = 0;
    for (std::size_t g = 0; g < gestures.size(); ++g) {
        int seg_end;
        if (g + 1 < gestures.size()) {
            std::int64_t mid = (gestures[g].end + gestures[g + 1].start) / 2;
            seg_end = static_cast<int>(mid / kMsPerFrame);
        } else {
            seg_end = last_frame;
        }
        seg_end = std::clamp(seg_end, seg_begin, last_frame);
        KeylogSegment seg;
        seg.frames.assign(frames.begin() + seg_begin, frames.begin() + seg_end + 1);
        const std::int64_t lo = static_cast<std::int64_t>(seg_begin) * kMsPerFrame;
        const std::int64_t hi = static_cast<std::int64_t>(seg_end + 1) * kMsPerFrame;
        for (const auto& e : keylog.entries)
            if (e.timestamp_ms >= lo && e.timestamp_ms < hi)
                seg.keylog.entries.push_back(e);
        out.push_back(std::move(seg));
        seg_begin = seg_end + 1;
        if (seg_begin > last_frame)
            seg_begin = last_frame;
    }
    return out;
}

} // namespace guicap
