#include "guicap/scoring_head.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace guicap {
namespace {

constexpr float kLnEps = 1e-5f;
constexpr char kMagic[4] = {'A', 'K', 'F', 'H'};
constexpr std::uint32_t kVersion = 1;

/// Order-canonical sum: addends sorted ascending before accumulation, so the
/// result is a function of the multiset only.
double sorted_sum(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v)
        acc += x;
    return acc;
}

float sigmoidf(float z) { return 1.0f / (1.0f + std::exp(-z)); }

} // namespace

struct ScoringHead::Cache {
    struct BlockCache {
        Eigen::MatrixXf x_in, q, k, v;      // N x d
        std::vector<Eigen::MatrixXf> probs; // per head, N x N
        Eigen::MatrixXf heads_out;          // N x d (concatenated heads)
        Eigen::MatrixXf attn_out;           // N x d
        Eigen::MatrixXf res;                // N x d
        Eigen::VectorXf mu, inv;            // per row
        Eigen::MatrixXf out;                // N x d
    };
    std::vector<BlockCache> blocks;
};

ScoringHead::ScoringHead(int layers, int heads, int dim, std::uint64_t seed)
    : layers_(layers), heads_(heads), dim_(dim) {
    if (layers < 1 || heads < 1 || dim < heads || dim % heads != 0)
        throw DimensionMismatch("ScoringHead: invalid (L, h, d_v)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f / std::sqrt(static_cast<float>(dim)));
    auto randm = [&](int r, int c) {
        Eigen::MatrixXf m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                m(i, j) = dist(rng);
        return m;
    };
    blocks_.resize(layers);
    for (auto& b : blocks_) {
        b.wq = randm(dim, dim);
        b.wk = randm(dim, dim);
        b.wv = randm(dim, dim);
        b.wo = randm(dim, dim);
        b.gamma = Eigen::VectorXf::Ones(dim);
        b.beta = Eigen::VectorXf::Zero(dim);
    }
    proj_w = Eigen::VectorXf(dim);
    for (int i = 0; i < dim; ++i)
        proj_w[i] = dist(rng);
    proj_b = 0.0f;
}

Eigen::MatrixXf ScoringHead::forward(const FrameFeatures& feats, Cache* cache) const {
    if (feats.cols() != dim_)
        throw DimensionMismatch("ScoringHead: feature dim " + std::to_string(feats.cols()) +
                                " != head dim " + std::to_string(dim_));
    const int n = static_cast<int>(feats.rows());
    const int dh = dim_ / heads_;
    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));

    if (cache)
        cache->blocks.resize(layers_);
    Eigen::MatrixXf x = feats;
    std::vector<double> addends(n);
    for (int l = 0; l < layers_; ++l) {
        const Block& b = blocks_[l];
        // row-by-row products: each row's arithmetic must not depend on its
        // position, so frame permutations commute with scoring bit-for-bit
        Eigen::MatrixXf q(n, dim_), k(n, dim_), v(n, dim_);
        for (int i = 0; i < n; ++i) {
            q.row(i) = x.row(i) * b.wq;
            k.row(i) = x.row(i) * b.wk;
            v.row(i) = x.row(i) * b.wv;
        }
        Eigen::MatrixXf heads_out(n, dim_);
        std::vector<Eigen::MatrixXf> probs(heads_);
        for (int h = 0; h < heads_; ++h) {
            auto qh = q.middleCols(h * dh, dh);
            auto kh = k.middleCols(h * dh, dh);
            auto vh = v.middleCols(h * dh, dh);
            Eigen::MatrixXf p(n, n);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXf logits(n);
                for (int j = 0; j < n; ++j)
                    logits[j] = qh.row(i).dot(kh.row(j)) * inv_sqrt_dh;
                float m = logits.maxCoeff();
                for (int j = 0; j < n; ++j) {
                    p(i, j) = std::exp(logits[j] - m);
                    addends[j] = p(i, j);
                }
                float z = static_cast<float>(sorted_sum(addends));
                for (int j = 0; j < n; ++j)
                    p(i, j) /= z;
            }
            for (int i = 0; i < n; ++i) {
                for (int c = 0; c < dh; ++c) {
                    for (int j = 0; j < n; ++j)
                        addends[j] = static_cast<double>(p(i, j)) * vh(j, c);
                    heads_out(i, h * dh + c) = static_cast<float>(sorted_sum(addends));
                }
            }
            probs[h] = std::move(p);
        }
        Eigen::MatrixXf attn_out(n, dim_);
        for (int i = 0; i < n; ++i)
            attn_out.row(i) = heads_out.row(i) * b.wo;
        Eigen::MatrixXf res = x + attn_out;
        Eigen::MatrixXf out(n, dim_);
        Eigen::VectorXf mu(n), inv(n);
        for (int i = 0; i < n; ++i) {
            float m = res.row(i).mean();
            float var = (res.row(i).array() - m).square().mean();
            float is = 1.0f / std::sqrt(var + kLnEps);
            mu[i] = m;
            inv[i] = is;
            out.row(i) = ((res.row(i).array() - m) * is).matrix().cwiseProduct(b.gamma.transpose()) +
                         b.beta.transpose();
        }
        if (cache) {
            auto& bc = cache->blocks[l];
            bc.x_in = x;
            bc.q = std::move(q);
            bc.k = std::move(k);
            bc.v = std::move(v);
            bc.probs = std::move(probs);
            bc.heads_out = std::move(heads_out);
            bc.attn_out = std::move(attn_out);
            bc.res = std::move(res);
            bc.mu = std::move(mu);
            bc.inv = std::move(inv);
            bc.out = out;
        }
        x = std::move(out);
    }
    return x;
}

std::vector<float> ScoringHead::score(const FrameFeatures& feats) const {
    Eigen::MatrixXf x = forward(feats, nullptr);
    std::vector<float> scores(static_cast<std::size_t>(x.rows()));
    for (int i = 0; i < x.rows(); ++i)
        scores[static_cast<std::size_t>(i)] = x.row(i).dot(proj_w.transpose()) + proj_b;
    return scores;
}

double ScoringHead::sample_grad(const TrainSample& sample, std::vector<Block>& grads,
                                Eigen::VectorXf& grad_w, float& grad_b) const {
    const int n = static_cast<int>(sample.feats.rows());
    const int dh = dim_ / heads_;
    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));

    Cache cache;
    Eigen::MatrixXf x = forward(sample.feats, &cache);

    Eigen::VectorXf z(n), target = Eigen::VectorXf::Zero(n);
    target[sample.gt_s] = 1.0f;
    target[sample.gt_e] = 1.0f;
    double loss = 0.0;
    Eigen::VectorXf dz(n);
    for (int i = 0; i < n; ++i) {
        z[i] = x.row(i).dot(proj_w.transpose()) + proj_b;
        // numerically stable BCE-with-logits
        loss += std::max(z[i], 0.0f) - z[i] * target[i] + std::log1p(std::exp(-std::abs(z[i])));
        dz[i] = (sigmoidf(z[i]) - target[i]) / n;
    }
    loss /= n;

    Eigen::MatrixXf dx = dz * proj_w.transpose(); // N x d
    grad_w += x.transpose() * dz;
    grad_b += dz.sum();

    for (int l = layers_ - 1; l >= 0; --l) {
        const Block& b = blocks_[l];
        Block& g = grads[l];
        const auto& bc = cache.blocks[l];

        // layer norm backward
        Eigen::MatrixXf dres(n, dim_);
        for (int i = 0; i < n; ++i) {
            Eigen::ArrayXf xhat = (bc.res.row(i).transpose().array() - bc.mu[i]) * bc.inv[i];
            Eigen::ArrayXf dy = dx.row(i).transpose().array();
            g.gamma.array() += dy * xhat;
            g.beta.array() += dy;
            Eigen::ArrayXf dxhat = dy * b.gamma.array();
            float m1 = dxhat.mean();
            float m2 = (dxhat * xhat).mean();
            dres.row(i) = (bc.inv[i] * (dxhat - m1 - xhat * m2)).matrix().transpose();
        }

        // residual split
        Eigen::MatrixXf dattn = dres;
        Eigen::MatrixXf dx_in = dres;

        // attn_out = heads_out * wo
        g.wo += bc.heads_out.transpose() * dattn;
        Eigen::MatrixXf dheads = dattn * b.wo.transpose();

        Eigen::MatrixXf dq = Eigen::MatrixXf::Zero(n, dim_);
        Eigen::MatrixXf dk = Eigen::MatrixXf::Zero(n, dim_);
        Eigen::MatrixXf dv = Eigen::MatrixXf::Zero(n, dim_);
        for (int h = 0; h < heads_; ++h) {
            const Eigen::MatrixXf& p = bc.probs[h];
            auto qh = bc.q.middleCols(h * dh, dh);
            auto kh = bc.k.middleCols(h * dh, dh);
            auto vh = bc.v.middleCols(h * dh, dh);
            auto dhh = dheads.middleCols(h * dh, dh);

            Eigen::MatrixXf dp = dhh * vh.transpose();           // N x N
            dv.middleCols(h * dh, dh) = p.transpose() * dhh;

            Eigen::MatrixXf dlogits(n, n);
            for (int i = 0; i < n; ++i) {
                float dot = dp.row(i).dot(p.row(i));
                dlogits.row(i) = (dp.row(i).array() - dot) * p.row(i).array();
            }
            dq.middleCols(h * dh, dh) = dlogits * kh * inv_sqrt_dh;
            dk.middleCols(h * dh, dh) = dlogits.transpose() * qh * inv_sqrt_dh;
        }

        g.wq += bc.x_in.transpose() * dq;
        g.wk += bc.x_in.transpose() * dk;
        g.wv += bc.x_in.transpose() * dv;
        dx_in += dq * b.wq.transpose() + dk * b.wk.transpose() + dv * b.wv.transpose();
        dx = std::move(dx_in);
    }
    return loss;
}

TrainReport ScoringHead::train(const std::vector<TrainSample>& samples, int epochs,
                               float lr, std::uint64_t shuffle_seed) {
    if (samples.empty())
        throw Error("train: no samples");
    for (const auto& s : samples) {
        if (s.feats.cols() != dim_)
            throw DimensionMismatch("train: inconsistent feature dim");
        if (s.gt_s < 0 || s.gt_e <= s.gt_s || s.gt_e >= s.feats.rows())
            throw Error("train: ground-truth keyframes out of range");
    }

    auto mean_loss = [&]() {
        std::vector<Block> scratch = blocks_;
        for (auto& g : scratch) {
            g.wq.setZero(); g.wk.setZero(); g.wv.setZero(); g.wo.setZero();
            g.gamma.setZero(); g.beta.setZero();
        }
        Eigen::VectorXf gw = Eigen::VectorXf::Zero(dim_);
        float gb = 0.0f;
        double acc = 0.0;
        for (const auto& s : samples)
            acc += sample_grad(s, scratch, gw, gb);
        return acc / samples.size();
    };

    TrainReport report;
    report.initial_loss = mean_loss();
    report.epochs = epochs;
    if (epochs == 0) {
        report.final_loss = report.initial_loss;
        return report;
    }

    // Adam state mirroring the parameter layout
    struct AdamPair { Eigen::MatrixXf m, v; };
    auto zeros_like = [](const auto& w) {
        return AdamPair{Eigen::MatrixXf::Zero(w.rows(), w.cols()),
                        Eigen::MatrixXf::Zero(w.rows(), w.cols())};
    };
    std::vector<std::vector<AdamPair>> state(blocks_.size());
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
        state[l].push_back(zeros_like(blocks_[l].wq));
        state[l].push_back(zeros_like(blocks_[l].wk));
        state[l].push_back(zeros_like(blocks_[l].wv));
        state[l].push_back(zeros_like(blocks_[l].wo));
        state[l].push_back(zeros_like(blocks_[l].gamma));
        state[l].push_back(zeros_like(blocks_[l].beta));
    }
    AdamPair state_w = zeros_like(proj_w);
    float mb = 0.0f, vb = 0.0f;

    constexpr float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    long step = 0;
    auto adam = [&](auto& w, const auto& grad, AdamPair& st) {
        st.m = (b1 * st.m + (1.0f - b1) * grad).eval();
        st.v = (b2 * st.v.array() + (1.0f - b2) * grad.array().square()).matrix().eval();
        float c1 = 1.0f - std::pow(b1, static_cast<float>(step));
        float c2 = 1.0f - std::pow(b2, static_cast<float>(step));
        w.array() -= lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + eps);
    };

    std::mt19937_64 rng(shuffle_seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    constexpr std::size_t kBatch = 24;
    std::vector<Block> grads = blocks_;
    double last_epoch_loss = report.initial_loss;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double acc = 0.0;
        for (std::size_t start = 0; start < order.size(); start += kBatch) {
            std::size_t count = std::min(kBatch, order.size() - start);
            for (auto& g : grads) {
                g.wq.setZero(); g.wk.setZero(); g.wv.setZero(); g.wo.setZero();
                g.gamma.setZero(); g.beta.setZero();
            }
            Eigen::VectorXf gw = Eigen::VectorXf::Zero(dim_);
            float gb = 0.0f;
            for (std::size_t i = start; i < start + count; ++i)
                acc += sample_grad(samples[order[i]], grads, gw, gb);
            float inv = 1.0f / static_cast<float>(count);
            ++step;
            for (std::size_t l = 0; l < blocks_.size(); ++l) {
                adam(blocks_[l].wq, (grads[l].wq * inv).eval(), state[l][0]);
                adam(blocks_[l].wk, (grads[l].wk * inv).eval(), state[l][1]);
                adam(blocks_[l].wv, (grads[l].wv * inv).eval(), state[l][2]);
                adam(blocks_[l].wo, (grads[l].wo * inv).eval(), state[l][3]);
                adam(blocks_[l].gamma, (grads[l].gamma * inv).eval(), state[l][4]);
                adam(blocks_[l].beta, (grads[l].beta * inv).eval(), state[l][5]);
            }
            adam(proj_w, (gw * inv).eval(), state_w);
            // scalar bias update inline
            gb *= inv;
            mb = b1 * mb + (1.0f - b1) * gb;
            vb = b2 * vb + (1.0f - b2) * gb * gb;
            float c1 = 1.0f - std::pow(b1, static_cast<float>(step));
            float c2 = 1.0f - std::pow(b2, static_cast<float>(step));
            proj_b -= lr * (mb / c1) / (std::sqrt(vb / c2) + eps);
        }
        last_epoch_loss = acc / samples.size();
    }
    report.final_loss = last_epoch_loss;
    return report;
}

void ScoringHead::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("scoring head: cannot open for write: " + path.string());
    f.write(kMagic, 4);
    std::uint32_t version = kVersion, dv = static_cast<std::uint32_t>(dim_);
    std::uint16_t l16 = static_cast<std::uint16_t>(layers_);
    std::uint16_t h16 = static_cast<std::uint16_t>(heads_);
    f.write(reinterpret_cast<const char*>(&version), 4);
    f.write(reinterpret_cast<const char*>(&l16), 2);
    f.write(reinterpret_cast<const char*>(&h16), 2);
    f.write(reinterpret_cast<const char*>(&dv), 4);
    auto write_mat = [&](const Eigen::MatrixXf& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) {
                float v = m(r, c);
                f.write(reinterpret_cast<const char*>(&v), 4);
            }
    };
    for (const auto& b : blocks_) {
        write_mat(b.wq);
        write_mat(b.wk);
        write_mat(b.wv);
        write_mat(b.wo);
        write_mat(b.gamma);
        write_mat(b.beta);
    }
    write_mat(proj_w);
    f.write(reinterpret_cast<const char*>(&proj_b), 4);
    if (!f)
        throw Error("scoring head: short write: " + path.string());
}

ScoringHead ScoringHead::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("scoring head: cannot open: " + path.string());
    char magic[4];
    std::uint32_t version, dv;
    std::uint16_t l16, h16;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&l16), 2);
    f.read(reinterpret_cast<char*>(&h16), 2);
    f.read(reinterpret_cast<char*>(&dv), 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("scoring head: bad magic in " + path.string());
    if (version != kVersion)
        throw Error("scoring head: unsupported version " + std::to_string(version));

    ScoringHead head(l16, h16, static_cast<int>(dv), 0);
    auto read_mat = [&](Eigen::MatrixXf& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) {
                float v;
                f.read(reinterpret_cast<char*>(&v), 4);
                m(r, c) = v;
            }
    };
    for (auto& b : head.blocks_) {
        read_mat(b.wq);
        read_mat(b.wk);
        read_mat(b.wv);
        read_mat(b.wo);
        Eigen::MatrixXf g(b.gamma.size(), 1), bt(b.beta.size(), 1);
        read_mat(g);
        read_mat(bt);
        b.gamma = g.col(0);
        b.beta = bt.col(0);
    }
    Eigen::MatrixXf w(head.proj_w.size(), 1);
    read_mat(w);
    head.proj_w = w.col(0);
    f.read(reinterpret_cast<char*>(&head.proj_b), 4);
    if (!f)
        throw Error("scoring head: truncated file " + path.string());
    return head;
}

bool ScoringHead::operator==(const ScoringHead& o) const {
    if (layers_ != o.layers_ || heads_ != o.heads_ || dim_ != o.dim_)
        return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& a = blocks_[i];
        const auto& b = o.blocks_[i];
        if (a.wq != b.wq || a.wk != b.wk || a.wv != b.wv || a.wo != b.wo ||
            a.gamma != b.gamma || a.beta != b.beta)
            return false;
    }
    return proj_w == o.proj_w && proj_b == o.proj_b;
}

ScoringHead train_head(const std::vector<TrainSample>& samples, int epochs,
                       float lr, std::uint64_t seed, TrainReport* report) {
    ScoringHead head = ScoringHead::make_default(seed);
    TrainReport r = head.train(samples, epochs, lr, seed ^ 0x5eedf00dULL);
    if (report)
        *report = r;
    return head;
}

} // namespace guicap
