#pragma once

#include "guicap/errors.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace guicap {

enum class ActionCategory { LeftClick, DoubleClick, RightClick, Drag, Type, Unknown };

std::string to_string(ActionCategory c);

/// The five scored categories, in report column order.
const std::vector<ActionCategory>& score_categories();

/// Action-type-dependent caption decomposition: Click/Type captions carry
/// [specific_action, gui_element]; Drag captions carry
/// [specific_action, start, end, gui_element, purpose].
struct ElementVector {
    ActionCategory category = ActionCategory::Unknown;
    std::vector<std::pair<std::string, std::string>> slots; // (name, value)
};

struct MatchVector {
    std::vector<int> bits;
    int union_size = 0;
    int matched() const {
        int m = 0;
        for (int b : bits)
            m += b;
        return m;
    }
};

struct ScoreReport {
    std::map<ActionCategory, double> per_category; // percent
    std::map<ActionCategory, int> n_samples;
    double average = 0.0; // unweighted mean over non-empty categories

    std::string format_table() const;
};

/// Total function: template captions parse exactly, free-form captions fall
/// back to keyword extraction, unknown parts yield empty slots.
ElementVector decompose(const std::string& caption);

/// Case/whitespace/punctuation-normalizing matcher with the fixed synonym
/// classes (button ~ icon, folder ~ file) and containment on element labels.
/// Class mismatch zeroes every bit and unions both schemas.
MatchVector match_elements(const ElementVector& pred, const ElementVector& gt);

struct ScoredSample {
    MatchVector match;
    double iou = 0.0;
};

ScoredSample score_sample(const std::string& pred_caption, const std::string& gt_caption);

/// Micro IoU within each ground-truth category, macro-averaged across the
/// categories that have samples.
ScoreReport score_dataset(const std::vector<std::pair<std::string, std::string>>& pred_gt_pairs);

/// Recompute a report from per-sample match vectors; oracle used by tests.
ScoreReport report_from_matches(const std::vector<std::pair<ActionCategory, MatchVector>>& matches);

/// Normalization applied before slot comparison, exposed for tests.
std::string normalize_for_match(const std::string& s);

/// One send per attempt; transport failures throw.
class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    virtual std::string ask(const std::string& prompt) = 0;
};

/// Prompt sent to the judge for a prediction/ground-truth pair.
std::string judge_prompt(const std::string& pred_caption, const std::string& gt_caption);

/// Parses the judge's bracketed 0/1 list (length 5 for Drag, 2 otherwise).
/// Re-asks up to 2 times on unparseable replies.
MatchVector llm_judge(const std::string& pred_caption, const std::string& gt_caption,
                      JudgeClient& judge);

} // namespace guicap
