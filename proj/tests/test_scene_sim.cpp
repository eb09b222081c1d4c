#include <doctest.h>

#include "guicap/cursor_ground.hpp"
#include "guicap/pipeline.hpp"
#include "guicap/scene_sim.hpp"

#include <set>

using namespace guicap;

namespace {

// Pixel-diff oracle that ignores the cursor sprite: masks a bounding box
// around both frames' detected cursor positions before comparing.
bool equal_outside_cursor(const Image& a, const Image& b, Point ca, Point cb) {
    const auto& rows = cursor_sprite_rows();
    int sw = static_cast<int>(rows[0].size()) * 2; // scale headroom
    int sh = static_cast<int>(rows.size()) * 2;
    auto masked = [&](int x, int y) {
        return (x >= ca.x - 1 && x < ca.x + sw && y >= ca.y - 1 && y < ca.y + sh) ||
               (x >= cb.x - 1 && x < cb.x + sw && y >= cb.y - 1 && y < cb.y + sh);
    };
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (!masked(x, y) && a.at(x, y) != b.at(x, y))
                return false;
    return true;
}

} // namespace

TEST_CASE("render_scene determinism and cursor bounds") {
    GuiScene scene = make_default_scene();
    Image a = render_scene(scene, {100, 100}, {});
    Image b = render_scene(scene, {100, 100}, {});
    CHECK(a == b);
    CHECK_NOTHROW(render_scene(scene, {0, 0}, {}));
    CHECK_THROWS_AS(render_scene(scene, {scene.width, 10}, {}), CursorOutOfBounds);
    CHECK_THROWS_AS(render_scene(scene, {10, -1}, {}), CursorOutOfBounds);
}

TEST_CASE("overlay changes stay inside the overlay rect") {
    GuiScene scene = make_default_scene();
    Rect menu{100, 100, 120, 90};
    Image plain = render_scene(scene, {50, 50}, {});
    Image with_menu =
        render_scene(scene, {50, 50}, {{Overlay::Kind::ContextMenu, menu, "", "", 0, 0}});
    CHECK(pixel_diff_count(plain, with_menu) > 0);
    for (int y = 0; y < plain.height(); ++y)
        for (int x = 0; x < plain.width(); ++x)
            if (!menu.contains(x, y))
                REQUIRE(plain.at(x, y) == with_menu.at(x, y));
}

TEST_CASE("caption templates per action grammar") {
    GuiScene scene = make_default_scene();
    CHECK(caption_template(scene, script_for(ActionType::LeftClick, 0)) ==
          "Left-Click on Export button");
    CHECK(caption_template(scene, script_for(ActionType::RightClick, 0)) ==
          "Right-Click on Save icon");
    CHECK(caption_template(scene, script_for(ActionType::DoubleClick, 0)) ==
          "Double-Click on Open menu_item");
    CHECK(caption_template(scene, script_for(ActionType::Drag, 0)) ==
          "Drag the keyframe marker from timeline to preview to move the clip");
    CHECK(caption_template(scene, script_for(ActionType::Type, 0)) ==
          "Type 'hello' in search box text_field");
}

TEST_CASE("execute_action is seed-deterministic") {
    GuiScene scene = make_default_scene();
    ActionScript script = script_for(ActionType::LeftClick, 7);
    GeneratedSample a = execute_action(scene, script, 20);
    GeneratedSample b = execute_action(scene, script, 20);
    REQUIRE(a.frames.size() == 20);
    CHECK(a.frames == b.frames);
    CHECK(a.keylog == b.keylog);
    CHECK(a.gt_caption == b.gt_caption);
    CHECK(a.gt_start == b.gt_start);
    CHECK(a.gt_end == b.gt_end);
}

TEST_CASE("left click keylog contains one DOWN/UP pair inside the target") {
    GuiScene scene = make_default_scene();
    GeneratedSample s = execute_action(scene, script_for(ActionType::LeftClick, 7), 20);
    const Rect target = scene.find_widget("btn_export")->rect;
    int downs = 0, ups = 0;
    for (const auto& e : s.keylog.entries) {
        if (e.kind == KeyKind::MouseDown) {
            ++downs;
            CHECK(target.contains(e.x, e.y));
        }
        if (e.kind == KeyKind::MouseUp) {
            ++ups;
            CHECK(target.contains(e.x, e.y));
        }
    }
    CHECK(downs == 1);
    CHECK(ups == 1);
}

TEST_CASE("drag keylog runs from source panel to destination panel") {
    GuiScene scene = make_default_scene();
    GeneratedSample s = execute_action(scene, script_for(ActionType::Drag, 3), 24);
    const Rect from = scene.find_panel("timeline")->rect;
    const Rect to = scene.find_panel("preview")->rect;
    int moves_during_drag = 0;
    bool down_seen = false;
    for (const auto& e : s.keylog.entries) {
        if (e.kind == KeyKind::MouseDown) {
            down_seen = true;
            CHECK(from.contains(e.x, e.y));
        } else if (e.kind == KeyKind::MouseMove && down_seen) {
            ++moves_during_drag;
        } else if (e.kind == KeyKind::MouseUp) {
            CHECK(to.contains(e.x, e.y));
        }
    }
    CHECK(down_seen);
    CHECK(moves_during_drag >= 1);
    CHECK(s.gt_start < s.gt_end);
    CHECK(s.gt_end < static_cast<int>(s.frames.size()));
}

TEST_CASE("double click and type keylog shapes") {
    GuiScene scene = make_default_scene();
    GeneratedSample dc = execute_action(scene, script_for(ActionType::DoubleClick, 11), 20);
    std::vector<std::int64_t> downs, ups;
    for (const auto& e : dc.keylog.entries) {
        if (e.kind == KeyKind::MouseDown)
            downs.push_back(e.timestamp_ms);
        if (e.kind == KeyKind::MouseUp)
            ups.push_back(e.timestamp_ms);
    }
    REQUIRE(downs.size() == 2);
    REQUIRE(ups.size() == 2);
    CHECK(downs[1] - ups[0] <= kDoubleClickGapMs);

    GeneratedSample ty = execute_action(scene, script_for(ActionType::Type, 11), 20);
    int presses = 0;
    std::string typed;
    for (const auto& e : ty.keylog.entries)
        if (e.kind == KeyKind::KeyPress) {
            ++presses;
            typed += e.key;
        }
    CHECK(presses == 5);
    CHECK(typed == "hello");
}

TEST_CASE("gt bracket: no non-cursor change before s or after e") {
    GuiScene scene = make_default_scene();
    auto library = default_sprite_library();
    for (ActionType action : {ActionType::LeftClick, ActionType::RightClick,
                              ActionType::Drag, ActionType::Type}) {
        CAPTURE(to_string(action));
        GeneratedSample s = execute_action(scene, script_for(action, 21), 20);
        std::vector<Point> cursors;
        for (const auto& f : s.frames) {
            auto fix = detect(f, library);
            REQUIRE(fix.has_value());
            cursors.push_back({fix->x, fix->y});
        }
        for (int i = 1; i <= s.gt_start; ++i)
            CHECK(equal_outside_cursor(s.frames[i - 1], s.frames[i], cursors[i - 1],
                                       cursors[i]));
        for (int i = s.gt_end + 1; i < static_cast<int>(s.frames.size()); ++i)
            CHECK(equal_outside_cursor(s.frames[i - 1], s.frames[i], cursors[i - 1],
                                       cursors[i]));
        // and the bracket is not vacuous: something changes inside it
        bool changed = false;
        for (int i = s.gt_start + 1; i <= s.gt_end && !changed; ++i)
            changed = !equal_outside_cursor(s.frames[i - 1], s.frames[i], cursors[i - 1],
                                            cursors[i]);
        CHECK(changed);
    }
}

TEST_CASE("randomized start takes multiple values across seeds") {
    GuiScene scene = make_default_scene();
    std::set<std::int64_t> first_moves;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GeneratedSample s = execute_action(scene, script_for(ActionType::LeftClick, seed), 20);
        for (const auto& e : s.keylog.entries)
            if (e.kind == KeyKind::MouseMove) {
                first_moves.insert(e.timestamp_ms);
                break;
            }
    }
    CHECK(first_moves.size() >= 3);
}

TEST_CASE("execute_action input validation") {
    GuiScene scene = make_default_scene();
    ActionScript script = script_for(ActionType::LeftClick, 0);
    script.target_widget = "nope";
    CHECK_THROWS_AS(execute_action(scene, script, 20), UnknownWidget);

    ActionScript drag = script_for(ActionType::Drag, 0);
    drag.drag_to.clear();
    CHECK_THROWS_AS(execute_action(scene, drag, 20), UnsupportedAction);
    CHECK_THROWS_AS(execute_action(scene, script_for(ActionType::LeftClick, 0), 3),
                    UnsupportedAction);
}

TEST_CASE("keylog serialize/parse round trip") {
    Keylog log;
    log.entries = {{100, KeyKind::MouseMove, 4, 5, ""},
                   {200, KeyKind::MouseDown, 6, 7, ""},
                   {240, KeyKind::MouseUp, 6, 7, ""},
                   {400, KeyKind::KeyPress, 0, 0, "h"}};
    CHECK(Keylog::parse(log.serialize()) == log);
}

TEST_CASE("segment_by_keylog gesture grouping") {
    std::vector<Image> frames(20, Image(8, 8));

    SUBCASE("two separated clicks give two segments") {
        Keylog log;
        log.entries = {{100, KeyKind::MouseDown, 1, 1, ""},
                       {140, KeyKind::MouseUp, 1, 1, ""},
                       {900, KeyKind::MouseDown, 2, 2, ""},
                       {940, KeyKind::MouseUp, 2, 2, ""}};
        auto segs = segment_by_keylog(frames, log);
        REQUIRE(segs.size() == 2);
        // all frames distributed, in order, disjoint
        CHECK(segs[0].frames.size() + segs[1].frames.size() == frames.size());
        // each segment holds exactly one DOWN/UP pair
        for (const auto& seg : segs) {
            int downs = 0;
            for (const auto& e : seg.keylog.entries)
                downs += e.kind == KeyKind::MouseDown;
            CHECK(downs == 1);
        }
    }
    SUBCASE("double click merges into one gesture") {
        Keylog log;
        log.entries = {{100, KeyKind::MouseDown, 1, 1, ""},
                       {130, KeyKind::MouseUp, 1, 1, ""},
                       {160, KeyKind::MouseDown, 1, 1, ""},
                       {190, KeyKind::MouseUp, 1, 1, ""}};
        CHECK(segment_by_keylog(frames, log).size() == 1);
    }
    SUBCASE("typing run is one gesture, far key press another") {
        Keylog log;
        log.entries = {{100, KeyKind::KeyPress, 0, 0, "a"},
                       {200, KeyKind::KeyPress, 0, 0, "b"},
                       {1500, KeyKind::KeyPress, 0, 0, "c"}};
        CHECK(segment_by_keylog(frames, log).size() == 2);
    }
    SUBCASE("no gestures give no segments") {
        Keylog log;
        log.entries = {{100, KeyKind::MouseMove, 1, 1, ""}};
        CHECK(segment_by_keylog(frames, log).empty());
        CHECK(segment_by_keylog(frames, Keylog{}).empty());
    }
    SUBCASE("unbalanced DOWN is malformed") {
        Keylog log;
        log.entries = {{100, KeyKind::MouseDown, 1, 1, ""}};
        CHECK_THROWS_AS(segment_by_keylog(frames, log), MalformedKeylog);
        Keylog log2;
        log2.entries = {{100, KeyKind::MouseUp, 1, 1, ""}};
        CHECK_THROWS_AS(segment_by_keylog(frames, log2), MalformedKeylog);
    }
}

TEST_CASE("generated sample segments to a single gesture") {
    GuiScene scene = make_default_scene();
    for (ActionType action : {ActionType::LeftClick, ActionType::DoubleClick,
                              ActionType::Type}) {
        GeneratedSample s = execute_action(scene, script_for(action, 5), 20);
        auto segs = segment_by_keylog(s.frames, s.keylog);
        CHECK(segs.size() == 1);
    }
}
