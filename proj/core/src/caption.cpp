#include "guicap/caption.hpp"

#include "guicap/png_io.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace guicap {

std::string query_text() {
    return "The cursor is located in the annotated green bounding box. The third and "
           "fourth image shows the cropped detailed image around the cursor before and "
           "after the action. Describe the single GUI action shown, naming the action "
           "type and the GUI element.";
}

CaptionQuery build_query(const Image& raw_s, const Image& raw_e,
                         const PromptedFrame& prompted_s, const PromptedFrame& prompted_e,
                         const QueryConfig& config) {
    CaptionQuery q;
    q.text = query_text();
    q.sample_id = config.sample_id;
    q.strategy = config.strategy;
    q.s_box = config.s_box;

    if (config.use_annotation && config.use_crop) {
        q.ablation = "full";
        q.images = {resize_for_backend(prompted_s.annotated, config.resize_w, config.resize_h),
                    resize_for_backend(prompted_e.annotated, config.resize_w, config.resize_h),
                    prompted_s.cropped, prompted_e.cropped};
    } else if (config.use_annotation) {
        // Single prompt component: the full-resolution image goes in as is.
        q.ablation = "no_crop";
        q.images = {prompted_s.annotated, prompted_e.annotated};
    } else if (config.use_crop) {
        q.ablation = "no_annotate";
        q.images = {prompted_s.cropped, prompted_e.cropped};
    } else {
        q.ablation = "raw";
        q.images = {raw_s, raw_e};
    }
    return q;
}

void OracleBackend::register_caption(const std::string& sample_id, std::string gt_caption) {
    captions_[sample_id] = std::move(gt_caption);
}

CaptionResult OracleBackend::caption(const CaptionQuery& query) {
    auto it = captions_.find(query.sample_id);
    if (it == captions_.end())
        throw BackendRejected("oracle: unknown sample id '" + query.sample_id + "'");
    return {it->second, id(), 0};
}

std::string base64_encode(const std::string& bytes) {
    static const char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                          (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                          static_cast<std::uint8_t>(bytes[i + 2]);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back(tbl[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                          (static_cast<std::uint8_t>(bytes[i + 1]) << 8);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

namespace {

struct SplitUrl {
    std::string host; // scheme://host:port
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("//");
    auto path_pos = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 2);
    if (path_pos == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_pos), url.substr(path_pos)};
}

} // namespace

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.url.empty())
        throw Error("remote backend: url not configured");
}

CaptionResult RemoteBackend::caption(const CaptionQuery& query) {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", query.text}});
    for (const auto& img : query.images) {
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:image/png;base64," + base64_encode(encode_png(img))}}}});
    }
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};

    auto [host, path] = split_url(config_.url);
    httplib::Client client(host);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!config_.auth_env.empty()) {
        if (const char* token = std::getenv(config_.auth_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    auto start = std::chrono::steady_clock::now();
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendRejected("remote backend HTTP " + std::to_string(res->status) +
                                  ": " + res->body);
        try {
            auto json = nlohmann::json::parse(res->body);
            std::string text = json.at("choices").at(0).at("message").at("content");
            if (text.empty())
                throw BackendRejected("remote backend returned empty caption");
            auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
            return {text, id(), static_cast<long>(latency)};
        } catch (const nlohmann::json::exception& e) {
            throw BackendRejected(std::string("remote backend: malformed response: ") +
                                  e.what());
        }
    }
    throw BackendUnavailable("remote backend gave no response after " +
                             std::to_string(config_.max_retries + 1) + " attempts (" +
                             last_error + ")");
}

std::string RemoteBackend::ask_text(const std::string& prompt) {
    CaptionQuery q;
    q.text = prompt;
    CaptionResult r = caption(q);
    return r.text;
}

std::unique_ptr<CaptionBackend> make_backend(const std::string& kind, const RemoteConfig& remote,
                                             const std::string& stub_reply) {
    if (kind == "stub")
        return std::make_unique<StubBackend>(stub_reply.empty() ? "Left-Click on Export button"
                                                                : stub_reply);
    if (kind == "oracle")
        return std::make_unique<OracleBackend>();
    if (kind == "remote")
        return std::make_unique<RemoteBackend>(remote);
    throw Error("unknown backend kind '" + kind + "'");
}

} // namespace guicap
