#include "guicap/scene.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace guicap {

std::string to_string(ActionType a) {
    switch (a) {
        case ActionType::LeftClick: return "LeftClick";
        case ActionType::RightClick: return "RightClick";
        case ActionType::DoubleClick: return "DoubleClick";
        case ActionType::Drag: return "Drag";
        case ActionType::Type: return "Type";
    }
    return "?";
}

std::optional<ActionType> action_from_string(const std::string& s) {
    if (s == "LeftClick") return ActionType::LeftClick;
    if (s == "RightClick") return ActionType::RightClick;
    if (s == "DoubleClick") return ActionType::DoubleClick;
    if (s == "Drag") return ActionType::Drag;
    if (s == "Type") return ActionType::Type;
    return std::nullopt;
}

std::string to_string(WidgetKind k) {
    switch (k) {
        case WidgetKind::Button: return "button";
        case WidgetKind::Icon: return "icon";
        case WidgetKind::MenuItem: return "menu_item";
        case WidgetKind::TextField: return "text_field";
        case WidgetKind::Handle: return "handle";
    }
    return "?";
}

std::string to_string(KeyKind k) {
    switch (k) {
        case KeyKind::MouseDown: return "MOUSE_DOWN";
        case KeyKind::MouseUp: return "MOUSE_UP";
        case KeyKind::MouseMove: return "MOUSE_MOVE";
        case KeyKind::KeyPress: return "KEY_PRESS";
    }
    return "?";
}

const Widget* GuiScene::find_widget(const std::string& id) const {
    for (const auto& w : widgets)
        if (w.id == id)
            return &w;
    return nullptr;
}

const Panel* GuiScene::find_panel(const std::string& name) const {
    for (const auto& p : panels)
        if (p.name == name)
            return &p;
    return nullptr;
}

void GuiScene::validate() const {
    if (width <= 0 || height <= 0)
        throw Error("scene: non-positive resolution");
    if (widgets.empty())
        throw Error("scene: at least one widget required");
    Rect bounds{0, 0, width, height};
    std::unordered_set<std::string> ids, names;
    for (const auto& w : widgets) {
        if (w.rect.w <= 0 || w.rect.h <= 0)
            throw Error("scene: widget '" + w.id + "' has empty rect");
        if (w.label.empty())
            throw Error("scene: widget '" + w.id + "' has empty label");
        if (!bounds.contains(w.rect))
            throw Error("scene: widget '" + w.id + "' outside resolution");
        if (!ids.insert(w.id).second)
            throw Error("scene: duplicate widget id '" + w.id + "'");
    }
    for (const auto& p : panels)
        if (!names.insert(p.name).second)
            throw Error("scene: duplicate panel name '" + p.name + "'");
}

std::string Keylog::serialize() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        out << e.timestamp_ms << '\t' << to_string(e.kind) << '\t';
        if (e.kind == KeyKind::KeyPress)
            out << e.key;
        else
            out << e.x << ',' << e.y;
        out << '\n';
    }
    return out.str();
}

Keylog Keylog::parse(const std::string& text) {
    Keylog log;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw MalformedKeylog("keylog line " + std::to_string(lineno) + ": expected 3 fields");
        KeyEvent e;
        e.timestamp_ms = std::stoll(line.substr(0, t1));
        std::string kind = line.substr(t1 + 1, t2 - t1 - 1);
        std::string payload = line.substr(t2 + 1);
        if (kind == "MOUSE_DOWN") e.kind = KeyKind::MouseDown;
        else if (kind == "MOUSE_UP") e.kind = KeyKind::MouseUp;
        else if (kind == "MOUSE_MOVE") e.kind = KeyKind::MouseMove;
        else if (kind == "KEY_PRESS") e.kind = KeyKind::KeyPress;
        else throw MalformedKeylog("keylog line " + std::to_string(lineno) + ": unknown kind " + kind);
        if (e.kind == KeyKind::KeyPress) {
            e.key = payload;
        } else {
            auto comma = payload.find(',');
            if (comma == std::string::npos)
                throw MalformedKeylog("keylog line " + std::to_string(lineno) + ": bad coordinates");
            e.x = std::stoi(payload.substr(0, comma));
            e.y = std::stoi(payload.substr(comma + 1));
        }
        log.entries.push_back(std::move(e));
    }
    return log;
}

void Keylog::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw Error("keylog: cannot open for write: " + path.string());
    f << serialize();
}

Keylog Keylog::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error("keylog: cannot open: " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse(text);
}

} // namespace guicap
