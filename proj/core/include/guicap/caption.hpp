#pragma once

#include "guicap/errors.hpp"
#include "guicap/prompting.hpp"
#include "guicap/scene.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace guicap {

/// Four-image query: [annotated_s, annotated_e, cropped_s, cropped_e].
/// Ablations drop images but keep the order of what remains.
struct CaptionQuery {
    std::vector<Image> images;
    std::string text;
    // meta
    std::string sample_id;
    int s_box = kDefaultBoxSize;
    std::string strategy;
    std::string ablation; // full | no_crop | no_annotate | raw
};

struct CaptionResult {
    std::string text;
    std::string backend_id;
    long latency_ms = 0;
};

struct QueryConfig {
    bool use_annotation = true;
    bool use_crop = true;
    int resize_w = 960;
    int resize_h = 512;
    std::string sample_id;
    std::string strategy;
    int s_box = kDefaultBoxSize;
};

/// Fixed text query: image-semantics template plus the output instruction.
std::string query_text();

CaptionQuery build_query(const Image& raw_s, const Image& raw_e,
                         const PromptedFrame& prompted_s, const PromptedFrame& prompted_e,
                         const QueryConfig& config);

class CaptionBackend {
public:
    virtual ~CaptionBackend() = default;
    virtual std::string id() const = 0;
    virtual CaptionResult caption(const CaptionQuery& query) = 0;
};

class StubBackend final : public CaptionBackend {
public:
    explicit StubBackend(std::string reply) : reply_(std::move(reply)) {}
    std::string id() const override { return "stub"; }
    CaptionResult caption(const CaptionQuery&) override { return {reply_, id(), 0}; }

private:
    std::string reply_;
};

/// Test-only closed-loop backend: replies with the registered ground-truth
/// caption for the query's sample id.
class OracleBackend final : public CaptionBackend {
public:
    void register_caption(const std::string& sample_id, std::string gt_caption);
    std::string id() const override { return "oracle"; }
    CaptionResult caption(const CaptionQuery& query) override;

private:
    std::map<std::string, std::string> captions_;
};

inline std::string oracle_caption(const GeneratedSample& sample) { return sample.gt_caption; }

struct RemoteConfig {
    std::string url;        // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string auth_env;   // env var holding the bearer token, may be empty
    int max_retries = 3;
    long backoff_base_ms = 1000; // doubles per retry
};

/// Chat-completions style client: one user message whose content mixes a text
/// part and base64 PNG image parts. Retries transport/5xx failures with
/// exponential backoff; 4xx is non-retryable.
class RemoteBackend final : public CaptionBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    std::string id() const override { return "remote:" + config_.model; }
    CaptionResult caption(const CaptionQuery& query) override;

    /// Text-only round trip on the same wire format (used by the LLM judge).
    std::string ask_text(const std::string& prompt);

private:
    RemoteConfig config_;
};

std::string base64_encode(const std::string& bytes);

std::unique_ptr<CaptionBackend> make_backend(const std::string& kind, const RemoteConfig& remote,
                                             const std::string& stub_reply = "");

} // namespace guicap
