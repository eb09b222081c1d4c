#include "guicap/metric.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

namespace guicap {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool starts_with_ci(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size())
        return false;
    return lower(s.substr(0, prefix.size())) == lower(prefix);
}

bool contains_ci(const std::string& s, const std::string& needle) {
    return lower(s).find(lower(needle)) != std::string::npos;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

ElementVector click_like(ActionCategory cat, std::string action, std::string element) {
    ElementVector v;
    v.category = cat;
    v.slots = {{"specific_action", std::move(action)}, {"gui_element", std::move(element)}};
    return v;
}

/// "Drag the E from S to T to P"; extra " to " separators fold into purpose.
bool parse_drag_template(const std::string& caption, ElementVector& out) {
    if (!starts_with_ci(caption, "drag the "))
        return false;
    std::string rest = caption.substr(9);
    auto from_pos = rest.find(" from ");
    if (from_pos == std::string::npos)
        return false;
    std::string element = rest.substr(0, from_pos);
    rest = rest.substr(from_pos + 6);
    auto to1 = rest.find(" to ");
    if (to1 == std::string::npos)
        return false;
    std::string start = rest.substr(0, to1);
    rest = rest.substr(to1 + 4);
    auto to2 = rest.find(" to ");
    if (to2 == std::string::npos)
        return false;
    std::string end = rest.substr(0, to2);
    std::string purpose = rest.substr(to2 + 4);
    out.category = ActionCategory::Drag;
    out.slots = {{"specific_action", caption.substr(0, 4)},
                 {"start", start},
                 {"end", end},
                 {"gui_element", element},
                 {"purpose", purpose}};
    return true;
}

std::string quoted_span(const std::string& s) {
    auto a = s.find('\'');
    if (a == std::string::npos)
        return "";
    auto b = s.find('\'', a + 1);
    if (b == std::string::npos)
        return "";
    return s.substr(a + 1, b - a - 1);
}

ElementVector decompose_freeform(const std::string& caption) {
    ActionCategory cat = ActionCategory::Unknown;
    std::string action;
    if (contains_ci(caption, "double") && contains_ci(caption, "click")) {
        cat = ActionCategory::DoubleClick;
        action = "Double-Click";
    } else if (contains_ci(caption, "right") && contains_ci(caption, "click")) {
        cat = ActionCategory::RightClick;
        action = "Right-Click";
    } else if (contains_ci(caption, "drag")) {
        cat = ActionCategory::Drag;
        action = "Drag";
    } else if (contains_ci(caption, "type") || contains_ci(caption, "press")) {
        cat = ActionCategory::Type;
        action = "Type";
    } else if (contains_ci(caption, "click")) {
        cat = ActionCategory::LeftClick;
        action = "Left-Click";
    }

    auto tail_after = [&](const std::string& sep) -> std::string {
        auto pos = lower(caption).rfind(lower(sep));
        if (pos == std::string::npos)
            return "";
        return trim(caption.substr(pos + sep.size()));
    };
    std::string element = quoted_span(caption);
    if (element.empty())
        element = tail_after(" on ");
    if (element.empty())
        element = tail_after(" in ");

    if (cat == ActionCategory::Drag) {
        ElementVector v;
        v.category = cat;
        std::string start, end, purpose;
        auto lc = lower(caption);
        auto fp = lc.find(" from ");
        if (fp != std::string::npos) {
            std::string rest = caption.substr(fp + 6);
            auto t1 = lower(rest).find(" to ");
            if (t1 != std::string::npos) {
                start = trim(rest.substr(0, t1));
                std::string rest2 = rest.substr(t1 + 4);
                auto t2 = lower(rest2).find(" to ");
                if (t2 != std::string::npos) {
                    end = trim(rest2.substr(0, t2));
                    purpose = trim(rest2.substr(t2 + 4));
                } else {
                    end = trim(rest2);
                }
            }
        }
        v.slots = {{"specific_action", action},
                   {"start", start},
                   {"end", end},
                   {"gui_element", element},
                   {"purpose", purpose}};
        return v;
    }
    // Unknown falls back to the 2-slot Click schema.
    return click_like(cat, action, element);
}

} // namespace

std::string to_string(ActionCategory c) {
    switch (c) {
        case ActionCategory::LeftClick: return "Left-Click";
        case ActionCategory::DoubleClick: return "Double-Click";
        case ActionCategory::RightClick: return "Right-Click";
        case ActionCategory::Drag: return "Drag";
        case ActionCategory::Type: return "Keyboard Type";
        case ActionCategory::Unknown: return "Unknown";
    }
    return "?";
}

const std::vector<ActionCategory>& score_categories() {
    static const std::vector<ActionCategory> cats = {
        ActionCategory::LeftClick, ActionCategory::DoubleClick,
        ActionCategory::RightClick, ActionCategory::Drag, ActionCategory::Type};
    return cats;
}

ElementVector decompose(const std::string& caption) {
    std::string c = trim(caption);
    if (c.empty())
        throw Error("decompose: empty caption");

    for (auto [prefix, cat] : {std::pair{"Left-Click on ", ActionCategory::LeftClick},
                               std::pair{"Right-Click on ", ActionCategory::RightClick},
                               std::pair{"Double-Click on ", ActionCategory::DoubleClick}}) {
        if (starts_with_ci(c, prefix)) {
            std::string action = c.substr(0, std::string(prefix).size() - 4);
            return click_like(cat, action, c.substr(std::string(prefix).size()));
        }
    }
    ElementVector drag;
    if (parse_drag_template(c, drag))
        return drag;
    if (starts_with_ci(c, "type ") && c.size() > 5)
        return click_like(ActionCategory::Type, "Type", c.substr(5));

    return decompose_freeform(c);
}

std::string normalize_for_match(const std::string& s) {
    std::string spaced;
    for (unsigned char c : s)
        spaced.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : ' ');
    std::istringstream in(spaced);
    std::string token, out;
    while (in >> token) {
        if (token == "icon") token = "button";
        else if (token == "icons") token = "buttons";
        else if (token == "file") token = "folder";
        else if (token == "files") token = "folders";
        if (!out.empty())
            out.push_back(' ');
        out += token;
    }
    return out;
}

namespace {

int slot_match(const std::string& pred, const std::string& gt) {
    std::string p = normalize_for_match(pred);
    std::string g = normalize_for_match(gt);
    if (p.empty() || g.empty())
        return static_cast<int>(p.empty() && g.empty());
    if (p == g)
        return 1;
    return (p.find(g) != std::string::npos || g.find(p) != std::string::npos) ? 1 : 0;
}

} // namespace

MatchVector match_elements(const ElementVector& pred, const ElementVector& gt) {
    MatchVector mv;
    if (pred.category != gt.category) {
        // Disjoint schemas share nothing: union both element lists.
        mv.bits.assign(gt.slots.size(), 0);
        mv.union_size = static_cast<int>(pred.slots.size() + gt.slots.size());
        return mv;
    }
    mv.bits.reserve(gt.slots.size());
    for (std::size_t i = 0; i < gt.slots.size(); ++i) {
        const std::string& pv = i < pred.slots.size() ? pred.slots[i].second : "";
        mv.bits.push_back(slot_match(pv, gt.slots[i].second));
    }
    mv.union_size = static_cast<int>(gt.slots.size());
    return mv;
}

ScoredSample score_sample(const std::string& pred_caption, const std::string& gt_caption) {
    ScoredSample out;
    out.match = match_elements(decompose(pred_caption), decompose(gt_caption));
    out.iou = out.match.union_size == 0
                  ? 0.0
                  : static_cast<double>(out.match.matched()) / out.match.union_size;
    return out;
}

ScoreReport report_from_matches(
    const std::vector<std::pair<ActionCategory, MatchVector>>& matches) {
    std::map<ActionCategory, long> hits, unions;
    std::map<ActionCategory, int> counts;
    for (const auto& [cat, mv] : matches) {
        ActionCategory bucket = cat == ActionCategory::Unknown ? ActionCategory::LeftClick : cat;
        hits[bucket] += mv.matched();
        unions[bucket] += mv.union_size;
        counts[bucket] += 1;
    }
    ScoreReport report;
    double acc = 0.0;
    int present = 0;
    for (ActionCategory cat : score_categories()) {
        int n = counts.count(cat) ? counts[cat] : 0;
        report.n_samples[cat] = n;
        if (n == 0)
            continue;
        double pct = unions[cat] == 0 ? 0.0
                                      : 100.0 * static_cast<double>(hits[cat]) / unions[cat];
        report.per_category[cat] = pct;
        acc += pct;
        ++present;
    }
    report.average = present == 0 ? 0.0 : acc / present;
    return report;
}

ScoreReport score_dataset(
    const std::vector<std::pair<std::string, std::string>>& pred_gt_pairs) {
    if (pred_gt_pairs.empty())
        throw Error("score_dataset: no pairs");
    std::vector<std::pair<ActionCategory, MatchVector>> matches;
    matches.reserve(pred_gt_pairs.size());
    for (const auto& [pred, gt] : pred_gt_pairs) {
        ElementVector gv = decompose(gt);
        matches.emplace_back(gv.category, match_elements(decompose(pred), gv));
    }
    return report_from_matches(matches);
}

std::string ScoreReport::format_table() const {
    std::ostringstream out;
    out << std::left << std::setw(16) << "Category" << std::right << std::setw(10)
        << "Score" << std::setw(10) << "Samples" << '\n';
    for (ActionCategory cat : score_categories()) {
        out << std::left << std::setw(16) << to_string(cat) << std::right;
        auto it = per_category.find(cat);
        if (it != per_category.end())
            out << std::setw(10) << std::fixed << std::setprecision(1) << it->second;
        else
            out << std::setw(10) << "-";
        out << std::setw(10) << (n_samples.count(cat) ? n_samples.at(cat) : 0) << '\n';
    }
    out << std::left << std::setw(16) << "Average" << std::right << std::setw(10)
        << std::fixed << std::setprecision(1) << average << '\n';
    return out.str();
}

std::string judge_prompt(const std::string& pred_caption, const std::string& gt_caption) {
    std::ostringstream p;
    p << "# Character Definition\n"
         "You are an assistant to judge whether the given answer and the ground truth "
         "have the same Semantics meanings.\n\n"
         "# Guidelines\n"
         "Action types are leftlick, rightclick, doubleclick, type write, drag.\n"
         "If the action is 'click' or 'keyboard type', split the description into "
         "[action type, element].\n"
         "If the action is 'Drag' split the description into "
         "[ action type, element, start(from), destination(to), purpose ].\n"
         "Return the metric whether the each have the same semantic meaning: "
         "0 for false, 1 for true.\n"
         "If the name of the element matches, the value will be 1.\n\n"
         "# Output Constraints\n"
         "Only return a list 0 or 1 for each element in the format of [ , , , , ] for "
         "drag action and [ , ] for the click or type in actions. "
         "Don't provide the reason.\n\n"
         "# Get started\n"
         "The given ground truth: <"
      << gt_caption << ">.\nThe given answer: <" << pred_caption << ">.\n";
    return p.str();
}

MatchVector llm_judge(const std::string& pred_caption, const std::string& gt_caption,
                      JudgeClient& judge) {
    const ElementVector gt = decompose(gt_caption);
    const std::size_t expected = gt.category == ActionCategory::Drag ? 5 : 2;
    const std::string prompt = judge_prompt(pred_caption, gt_caption);

    for (int attempt = 0; attempt < 3; ++attempt) {
        std::string reply;
        try {
            reply = judge.ask(prompt);
        } catch (const BackendUnavailable& e) {
            throw JudgeUnavailable(e.what());
        }
        auto open = reply.find('[');
        auto close = reply.find(']', open == std::string::npos ? 0 : open);
        if (open == std::string::npos || close == std::string::npos)
            continue;
        std::vector<int> bits;
        bool ok = true;
        std::string body = reply.substr(open + 1, close - open - 1);
        std::istringstream in(body);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (tok == "0")
                bits.push_back(0);
            else if (tok == "1")
                bits.push_back(1);
            else {
                ok = false;
                break;
            }
        }
        if (ok && bits.size() == expected) {
            MatchVector mv;
            mv.bits = std::move(bits);
            mv.union_size = static_cast<int>(expected);
            return mv;
        }
    }
    throw JudgeUnparseable("judge did not return a valid 0/1 list after retries");
}

} // namespace guicap
