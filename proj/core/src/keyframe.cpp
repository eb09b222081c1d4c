#include "guicap/keyframe.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace guicap {

std::string to_string(KeyframeStrategy s) {
    switch (s) {
        case KeyframeStrategy::Model: return "model";
        case KeyframeStrategy::Heuristic: return "heuristic";
        case KeyframeStrategy::StartEnd: return "start_end";
        case KeyframeStrategy::GroundTruth: return "ground_truth";
    }
    return "?";
}

std::optional<KeyframeStrategy> strategy_from_string(const std::string& s) {
    if (s == "model") return KeyframeStrategy::Model;
    if (s == "heuristic") return KeyframeStrategy::Heuristic;
    if (s == "start_end") return KeyframeStrategy::StartEnd;
    if (s == "ground_truth") return KeyframeStrategy::GroundTruth;
    return std::nullopt;
}

std::vector<int> sample_uniform_indices(int raw_count, int n) {
    if (raw_count < 1)
        throw Error("sample_uniform: no frames");
    if (n < 2)
        throw Error("sample_uniform: N must be >= 2");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i)
        idx[i] = static_cast<int>(std::lround(static_cast<double>(i) * (raw_count - 1) / (n - 1)));
    return idx;
}

std::pair<std::vector<Image>, std::vector<int>>
sample_uniform(const std::vector<Image>& frames, int n) {
    auto idx = sample_uniform_indices(static_cast<int>(frames.size()), n);
    std::vector<Image> sampled;
    sampled.reserve(idx.size());
    for (int i : idx)
        sampled.push_back(frames[i]);
    return {std::move(sampled), std::move(idx)};
}

Eigen::VectorXf embed(const Image& crop) {
    constexpr int kGrid = 16;
    Eigen::VectorXf v = Eigen::VectorXf::Zero(kEmbedDim);
    Eigen::VectorXf counts = Eigen::VectorXf::Zero(kEmbedDim);
    const int w = crop.width(), h = crop.height();
    for (int y = 0; y < h; ++y) {
        int by = std::min(kGrid - 1, y * kGrid / h);
        for (int x = 0; x < w; ++x) {
            int bx = std::min(kGrid - 1, x * kGrid / w);
            int cell = by * kGrid + bx;
            v[cell] += static_cast<float>(gray_value(crop.at(x, y)));
            counts[cell] += 1.0f;
        }
    }
    for (int i = 0; i < kEmbedDim; ++i)
        if (counts[i] > 0.0f)
            v[i] /= counts[i];
    v.array() -= v.mean();
    float norm = v.norm();
    if (norm > 0.0f)
        v /= norm;
    return v;
}

FrameFeatures embed_all(const std::vector<Image>& crops) {
    if (crops.empty())
        throw Error("embed_all: no crops");
    FrameFeatures feats(static_cast<int>(crops.size()), kEmbedDim);
    for (std::size_t i = 0; i < crops.size(); ++i)
        feats.row(static_cast<int>(i)) = embed(crops[i]).transpose();
    return feats;
}

KeyframeSelection select_keyframes(const std::vector<float>& scores) {
    const int n = static_cast<int>(scores.size());
    if (n < 2)
        throw Error("select_keyframes: need at least 2 scores");
    int first = 0;
    for (int i = 1; i < n; ++i)
        if (scores[i] > scores[first])
            first = i;
    int second = -1;
    for (int i = 0; i < n; ++i) {
        if (i == first)
            continue;
        if (second < 0 || scores[i] > scores[second])
            second = i;
    }
    KeyframeSelection sel;
    sel.s = std::min(first, second);
    sel.e = std::max(first, second);
    sel.strategy = KeyframeStrategy::Model;
    return sel;
}

KeyframeSelection heuristic_keyframes(const std::vector<Image>& crops, double tau) {
    const int n = static_cast<int>(crops.size());
    if (n < 2)
        throw Error("heuristic_keyframes: need at least 2 crops");
    std::vector<double> diffs(n - 1);
    double max_diff = 0.0;
    for (int t = 0; t < n - 1; ++t) {
        diffs[t] = mean_abs_diff(crops[t], crops[t + 1]);
        max_diff = std::max(max_diff, diffs[t]);
    }
    KeyframeSelection sel;
    sel.strategy = KeyframeStrategy::Heuristic;
    if (max_diff <= 0.0) {
        sel.s = 0;
        sel.e = n - 1;
        return sel;
    }
    int first = -1, last = -1;
    for (int t = 0; t < n - 1; ++t) {
        if (diffs[t] > tau * max_diff) {
            if (first < 0)
                first = t;
            last = t;
        }
    }
    sel.s = first;
    sel.e = last + 1;
    return sel;
}

KeyframeSelection start_end_keyframes(int n) {
    if (n < 2)
        throw Error("start_end_keyframes: N must be >= 2");
    return {0, n - 1, KeyframeStrategy::StartEnd};
}

} // namespace guicap
