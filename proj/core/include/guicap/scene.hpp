#pragma once

#include "guicap/errors.hpp"
#include "guicap/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace guicap {

enum class ActionType { LeftClick, RightClick, DoubleClick, Drag, Type };

enum class WidgetKind { Button, Icon, MenuItem, TextField, Handle };

std::string to_string(ActionType a);
std::string to_string(WidgetKind k);
std::optional<ActionType> action_from_string(const std::string& s);

struct Widget {
    std::string id;
    std::string label;
    WidgetKind kind = WidgetKind::Button;
    Rect rect;
};

struct Panel {
    std::string name;
    Rect rect;
};

struct GuiScene {
    int width = 0;
    int height = 0;
    std::vector<Widget> widgets;
    std::vector<Panel> panels;
    int cursor_sprite = 0;
    Color background{58, 58, 64};

    const Widget* find_widget(const std::string& id) const;
    const Panel* find_panel(const std::string& name) const;
    /// Throws Error on violated structural invariants.
    void validate() const;
};

struct ActionScript {
    ActionType action = ActionType::LeftClick;
    std::string target_widget;
    std::string drag_from;   // Drag only: source panel name
    std::string drag_to;     // Drag only: destination panel name
    std::string purpose;     // Drag only
    std::string typed_text;  // Type only
    std::uint64_t seed = 0;
};

enum class KeyKind { MouseDown, MouseUp, MouseMove, KeyPress };

std::string to_string(KeyKind k);

struct KeyEvent {
    std::int64_t timestamp_ms = 0;
    KeyKind kind = KeyKind::MouseMove;
    int x = 0, y = 0;        // mouse kinds
    std::string key;         // KeyPress
    bool operator==(const KeyEvent&) const = default;
};

/// Fixed mapping between keylog time and frame index.
constexpr std::int64_t kMsPerFrame = 100;

struct Keylog {
    std::vector<KeyEvent> entries;

    /// Line-oriented text: "timestamp_ms<TAB>kind<TAB>payload".
    std::string serialize() const;
    static Keylog parse(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static Keylog load(const std::filesystem::path& path);

    bool operator==(const Keylog&) const = default;
};

struct GeneratedSample {
    std::vector<Image> frames;
    Keylog keylog;
    std::string gt_caption;
    int gt_start = 0;   // last frame before the first state change
    int gt_end = 0;     // first frame after the last state change
    ActionType action_class = ActionType::LeftClick;
    GuiScene scene_snapshot;
};

} // namespace guicap
