#pragma once

#include "guicap/errors.hpp"
#include "guicap/image.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace guicap {

constexpr int kDefaultSampleCount = 10;
constexpr int kEmbedDim = 256;
constexpr double kHeuristicTau = 0.3;

enum class KeyframeStrategy { Model, Heuristic, StartEnd, GroundTruth };

std::string to_string(KeyframeStrategy s);
std::optional<KeyframeStrategy> strategy_from_string(const std::string& s);

struct KeyframeSelection {
    int s = 0;
    int e = 1;
    KeyframeStrategy strategy = KeyframeStrategy::Heuristic;
};

/// N frame embeddings stacked row-wise.
using FrameFeatures = Eigen::MatrixXf;

/// Uniform temporal sampling: index_i = round(i*(R-1)/(N-1)). First and last
/// raw frames always included; duplicates appear when R < N.
std::vector<int> sample_uniform_indices(int raw_count, int n = kDefaultSampleCount);
std::pair<std::vector<Image>, std::vector<int>>
sample_uniform(const std::vector<Image>& frames, int n = kDefaultSampleCount);

/// Built-in deterministic featurizer: gray 16x16 block-average, mean-centered,
/// L2-normalized (zero vector for constant crops). d_v = 256.
Eigen::VectorXf embed(const Image& crop);

FrameFeatures embed_all(const std::vector<Image>& crops);

/// Top-2 scores, reordered so s < e; ties break toward the lower index.
KeyframeSelection select_keyframes(const std::vector<float>& scores);

/// Consecutive-crop mean-absolute-diff window thresholded at tau * max diff.
KeyframeSelection heuristic_keyframes(const std::vector<Image>& crops,
                                      double tau = kHeuristicTau);

KeyframeSelection start_end_keyframes(int n);

} // namespace guicap
