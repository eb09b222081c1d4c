#include "guicap/config.hpp"

#include "guicap/keyframe.hpp"

#include <fstream>
#include <sstream>

namespace guicap {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

} // namespace

void PipelineConfig::validate() const {
    if (s_box <= 0)
        throw Error("config: s_box must be positive");
    if (sample_count < 2)
        throw Error("config: sample_count must be >= 2");
    if (!strategy_from_string(keyframe_strategy))
        throw Error("config: unknown keyframe strategy '" + keyframe_strategy + "'");
    if (backend_kind != "remote" && backend_kind != "oracle" && backend_kind != "stub")
        throw Error("config: unknown backend kind '" + backend_kind + "'");
    if (match_threshold <= 0.0 || match_threshold > 1.0)
        throw Error("config: match threshold must be in (0,1]");
    if (jobs < 1)
        throw Error("config: jobs must be >= 1");
}

void PipelineConfig::set_resize(const std::string& spec) {
    auto x = spec.find('x');
    if (x == std::string::npos)
        throw Error("config: resize must be WxH, got '" + spec + "'");
    resize_w = std::stoi(spec.substr(0, x));
    resize_h = std::stoi(spec.substr(x + 1));
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out << "backend.auth_env=" << backend_auth_env << '\n'
        << "backend.backoff_ms=" << backend_backoff_ms << '\n'
        << "backend.kind=" << backend_kind << '\n'
        << "backend.max_inflight=" << backend_max_inflight << '\n'
        << "backend.model=" << backend_model << '\n'
        << "backend.resize=" << resize_w << 'x' << resize_h << '\n'
        << "backend.stub_reply=" << stub_reply << '\n'
        << "backend.url=" << backend_url << '\n'
        << "cursor_detector.threshold=" << match_threshold << '\n'
        << "cursor_detector.url=" << cursor_detector_url << '\n'
        << "dump_prompts=" << dump_prompts << '\n'
        << "jobs=" << jobs << '\n'
        << "keyframe.head_path=" << head_path << '\n'
        << "keyframe.sample_count=" << sample_count << '\n'
        << "keyframe.strategy=" << keyframe_strategy << '\n'
        << "prompt.s_box=" << s_box << '\n'
        << "prompt.use_annotation=" << use_annotation << '\n'
        << "prompt.use_crop=" << use_crop << '\n'
        << "seed=" << seed << '\n';
    return out.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical()); }

void apply_config_key(PipelineConfig& config, const std::string& key, const std::string& value) {
    auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw Error("config: boolean expected for " + key + ", got '" + value + "'");
    };
    if (key == "prompt.s_box" || key == "s_box") config.s_box = std::stoi(value);
    else if (key == "keyframe.sample_count" || key == "sample_count") config.sample_count = std::stoi(value);
    else if (key == "keyframe.strategy") config.keyframe_strategy = value;
    else if (key == "keyframe.head_path") config.head_path = value;
    else if (key == "prompt.use_annotation") config.use_annotation = as_bool();
    else if (key == "prompt.use_crop") config.use_crop = as_bool();
    else if (key == "backend.kind") config.backend_kind = value;
    else if (key == "backend.url") config.backend_url = value;
    else if (key == "backend.model") config.backend_model = value;
    else if (key == "backend.auth_env") config.backend_auth_env = value;
    else if (key == "backend.resize") config.set_resize(value);
    else if (key == "backend.stub_reply") config.stub_reply = value;
    else if (key == "backend.max_inflight") config.backend_max_inflight = std::stoi(value);
    else if (key == "backend.backoff_ms") config.backend_backoff_ms = std::stol(value);
    else if (key == "cursor_detector.url") config.cursor_detector_url = value;
    else if (key == "cursor_detector.threshold") config.match_threshold = std::stod(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "jobs") config.jobs = std::stoi(value);
    else if (key == "dump_prompts") config.dump_prompts = as_bool();
    else throw Error("config: unknown key '" + key + "'");
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error("config: cannot open: " + path.string());
    PipelineConfig config;
    std::string line, section;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos)
            line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        if (!section.empty())
            key = section + "." + key;
        apply_config_key(config, key, value);
    }
    config.validate();
    return config;
}

} // namespace guicap
