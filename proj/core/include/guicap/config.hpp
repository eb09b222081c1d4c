#pragma once

#include "guicap/errors.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace guicap {

/// Tunables for the whole pipeline. Loaded from a TOML file, overridable
/// from CLI flags; hashed for the run log.
struct PipelineConfig {
    int s_box = 256;
    int sample_count = 10; // N uniformly sampled frames
    std::string keyframe_strategy = "heuristic";
    bool use_annotation = true;
    bool use_crop = true;
    int resize_w = 960;
    int resize_h = 512;

    std::string backend_kind = "stub"; // remote | oracle | stub
    std::string backend_url;
    std::string backend_model;
    std::string backend_auth_env;
    std::string stub_reply = "Left-Click on Export button";
    int backend_max_inflight = 4;
    long backend_backoff_ms = 1000;

    std::string cursor_detector_url; // empty = built-in template matcher
    double match_threshold = 0.85;

    std::string head_path; // scoring head weights (strategy = model)
    std::uint64_t seed = 0;
    int jobs = 1;
    bool dump_prompts = false;

    void validate() const;

    /// Canonical "key=value" listing; stable across runs.
    std::string canonical() const;
    /// FNV-1a 64 over canonical().
    std::uint64_t hash() const;

    /// Parses "WxH" into resize_w/resize_h.
    void set_resize(const std::string& spec);
};

/// Minimal TOML subset: [section] headers, key = value with string, integer,
/// float and boolean values, # comments.
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies one dotted "section.key" (or bare key) to the config.
/// Unknown keys throw.
void apply_config_key(PipelineConfig& config, const std::string& key, const std::string& value);

std::uint64_t fnv1a64(const std::string& data);

} // namespace guicap
