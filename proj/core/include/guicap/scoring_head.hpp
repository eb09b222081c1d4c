#pragma once

#include "guicap/keyframe.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace guicap {

struct TrainSample {
    FrameFeatures feats; // N x d_v
    int gt_s = 0;
    int gt_e = 1;
};

struct TrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int epochs = 0;
};

/// Stack of multi-head self-attention blocks (residual + layer norm) over the
/// frame features, projected per frame to a scalar keyframe score. No
/// positional encoding, so scoring is permutation-equivariant over frames.
class ScoringHead {
public:
    static constexpr int kDefaultLayers = 2;
    static constexpr int kDefaultHeads = 4;

    ScoringHead(int layers, int heads, int dim, std::uint64_t seed);
    static ScoringHead make_default(std::uint64_t seed) {
        return ScoringHead(kDefaultLayers, kDefaultHeads, kEmbedDim, seed);
    }

    int layers() const { return layers_; }
    int heads() const { return heads_; }
    int dim() const { return dim_; }

    /// Deterministic forward pass; one score per feature row. Token-axis
    /// reductions use order-canonical summation so a row permutation of the
    /// input permutes the output bitwise.
    std::vector<float> score(const FrameFeatures& feats) const;

    /// Adam on per-frame binary cross-entropy against the two-hot target.
    TrainReport train(const std::vector<TrainSample>& samples, int epochs,
                      float lr, std::uint64_t shuffle_seed);

    /// Flat little-endian float32 weights behind a 16-byte header
    /// (magic "AKFH", version, L, h, d_v).
    void save(const std::filesystem::path& path) const;
    static ScoringHead load(const std::filesystem::path& path);

    bool operator==(const ScoringHead& o) const;

private:
    struct Block {
        Eigen::MatrixXf wq, wk, wv, wo; // d x d
        Eigen::VectorXf gamma, beta;    // layer norm affine
    };

    struct Cache; // forward activations for backprop

    Eigen::MatrixXf forward(const FrameFeatures& feats, Cache* cache) const;
    double sample_grad(const TrainSample& sample, std::vector<Block>& grads,
                       Eigen::VectorXf& grad_w, float& grad_b) const;

    int layers_, heads_, dim_;
    std::vector<Block> blocks_;
    Eigen::VectorXf proj_w; // d
    float proj_b = 0.0f;
};

/// Convenience wrapper used by the CLI: default architecture, trained and
/// returned together with the loss trace.
ScoringHead train_head(const std::vector<TrainSample>& samples, int epochs,
                       float lr, std::uint64_t seed, TrainReport* report = nullptr);

} // namespace guicap
