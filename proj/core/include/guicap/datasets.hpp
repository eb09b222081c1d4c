#pragma once

#include "guicap/errors.hpp"
#include "guicap/image.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace guicap {

/// One manifest line. Ground-truth fields are written once by the collector;
/// stage artifacts are appended later and never touch them.
struct SampleRecord {
    std::string id;
    std::string split;        // train | test
    std::string frames_dir;   // relative to the manifest
    std::string keylog_path;  // relative to the manifest
    std::string gt_caption;
    std::string action_class; // LeftClick | RightClick | DoubleClick | Drag | Type
    std::string source;       // auto | manual | synthetic
    std::optional<int> gt_keyframe_s; // raw frame indices from the keylog
    std::optional<int> gt_keyframe_e;

    // optional stage artifacts
    std::string cursor_fixes_path;
    std::optional<int> keyframe_s;
    std::optional<int> keyframe_e;
    std::string keyframe_strategy;
    std::string prediction;
    std::optional<double> score;

    bool operator==(const SampleRecord&) const = default;
};

/// Line-delimited JSON, one record per line, snake_case keys. The writer
/// takes an exclusive advisory lock on the file.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<SampleRecord>& records);

/// Throws ManifestCorrupt (with line number) on malformed lines or records
/// with missing/invalid required fields.
std::vector<SampleRecord> load_manifest(const std::filesystem::path& path);

struct SplitStats {
    // (split, action_class, source) -> count
    std::map<std::tuple<std::string, std::string, std::string>, int> cells;
    std::map<std::string, int> split_totals;
    int total = 0;

    std::string format_table() const;
};

SplitStats stats(const std::vector<SampleRecord>& records);

/// Non-throwing dataset checks: referenced files exist, keyframes within the
/// frame count, synthetic captions parse, no id overlap across splits.
std::vector<std::string> validate(const std::vector<SampleRecord>& records,
                                  const std::filesystem::path& base_dir);

void save_frames(const std::filesystem::path& dir, const std::vector<Image>& frames);
std::vector<Image> load_frames(const std::filesystem::path& dir);
int count_frames(const std::filesystem::path& dir);

} // namespace guicap
