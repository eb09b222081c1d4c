#include "guicap/datasets.hpp"

#include "guicap/metric.hpp"
#include "guicap/png_io.hpp"
#include "guicap/scene.hpp"

#include <json.hpp>

#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace guicap {
namespace {

const std::set<std::string>& valid_actions() {
    static const std::set<std::string> v = {"LeftClick", "RightClick", "DoubleClick",
                                            "Drag", "Type"};
    return v;
}

nlohmann::json to_json(const SampleRecord& r) {
    nlohmann::json j = {
        {"id", r.id},
        {"split", r.split},
        {"frames_dir", r.frames_dir},
        {"keylog_path", r.keylog_path},
        {"gt_caption", r.gt_caption},
        {"action_class", r.action_class},
        {"source", r.source},
    };
    if (r.gt_keyframe_s)
        j["gt_keyframe_s"] = *r.gt_keyframe_s;
    if (r.gt_keyframe_e)
        j["gt_keyframe_e"] = *r.gt_keyframe_e;
    if (!r.cursor_fixes_path.empty())
        j["cursor_fixes_path"] = r.cursor_fixes_path;
    if (r.keyframe_s)
        j["keyframe_s"] = *r.keyframe_s;
    if (r.keyframe_e)
        j["keyframe_e"] = *r.keyframe_e;
    if (!r.keyframe_strategy.empty())
        j["keyframe_strategy"] = r.keyframe_strategy;
    if (!r.prediction.empty())
        j["prediction"] = r.prediction;
    if (r.score)
        j["score"] = *r.score;
    return j;
}

SampleRecord from_json(const nlohmann::json& j, int lineno) {
    auto require = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string())
            throw ManifestCorrupt("manifest line " + std::to_string(lineno) +
                                  ": missing field '" + key + "'");
        return j[key].get<std::string>();
    };
    SampleRecord r;
    r.id = require("id");
    r.split = require("split");
    r.frames_dir = require("frames_dir");
    r.keylog_path = require("keylog_path");
    r.gt_caption = require("gt_caption");
    r.action_class = require("action_class");
    r.source = require("source");
    if (r.split != "train" && r.split != "test")
        throw ManifestCorrupt("manifest line " + std::to_string(lineno) +
                              ": invalid split '" + r.split + "'");
    if (!valid_actions().count(r.action_class))
        throw ManifestCorrupt("manifest line " + std::to_string(lineno) +
                              ": invalid action_class '" + r.action_class + "'");
    if (j.contains("gt_keyframe_s"))
        r.gt_keyframe_s = j["gt_keyframe_s"].get<int>();
    if (j.contains("gt_keyframe_e"))
        r.gt_keyframe_e = j["gt_keyframe_e"].get<int>();
    if (j.contains("cursor_fixes_path"))
        r.cursor_fixes_path = j["cursor_fixes_path"].get<std::string>();
    if (j.contains("keyframe_s"))
        r.keyframe_s = j["keyframe_s"].get<int>();
    if (j.contains("keyframe_e"))
        r.keyframe_e = j["keyframe_e"].get<int>();
    if (j.contains("keyframe_strategy"))
        r.keyframe_strategy = j["keyframe_strategy"].get<std::string>();
    if (j.contains("prediction"))
        r.prediction = j["prediction"].get<std::string>();
    if (j.contains("score"))
        r.score = j["score"].get<double>();
    return r;
}

} // namespace

void write_manifest(const std::filesystem::path& path,
                    const std::vector<SampleRecord>& records) {
    std::ostringstream buf;
    for (const auto& r : records)
        buf << to_json(r).dump() << '\n';
    std::string text = buf.str();

    FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f)
        throw Error("manifest: cannot open for write: " + path.string());
    if (flock(fileno(f), LOCK_EX) != 0) {
        std::fclose(f);
        throw Error("manifest: cannot lock " + path.string());
    }
    std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
    flock(fileno(f), LOCK_UN);
    std::fclose(f);
    if (written != text.size())
        throw Error("manifest: short write: " + path.string());
}

std::vector<SampleRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error("manifest: cannot open: " + path.string());
    std::vector<SampleRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ManifestCorrupt("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        records.push_back(from_json(j, lineno));
    }
    return records;
}

SplitStats stats(const std::vector<SampleRecord>& records) {
    SplitStats s;
    for (const auto& r : records) {
        s.cells[{r.split, r.action_class, r.source}] += 1;
        s.split_totals[r.split] += 1;
        s.total += 1;
    }
    return s;
}

std::string SplitStats::format_table() const {
    std::ostringstream out;
    out << "split\taction_class\tsource\tcount\n";
    for (const auto& [key, count] : cells)
        out << std::get<0>(key) << '\t' << std::get<1>(key) << '\t' << std::get<2>(key)
            << '\t' << count << '\n';
    for (const auto& [split, count] : split_totals)
        out << split << "\t*\t*\t" << count << '\n';
    out << "total\t*\t*\t" << total << '\n';
    return out.str();
}

std::vector<std::string> validate(const std::vector<SampleRecord>& records,
                                  const std::filesystem::path& base_dir) {
    std::vector<std::string> violations;
    std::set<std::string> train_ids, test_ids, seen;
    for (const auto& r : records) {
        if (!seen.insert(r.id).second)
            violations.push_back(r.id + ": duplicate sample id");
        (r.split == "test" ? test_ids : train_ids).insert(r.id);

        auto frames_dir = base_dir / r.frames_dir;
        int frame_count = -1;
        if (!std::filesystem::is_directory(frames_dir))
            violations.push_back(r.id + ": frames_dir missing: " + r.frames_dir);
        else
            frame_count = count_frames(frames_dir);
        if (!std::filesystem::is_regular_file(base_dir / r.keylog_path))
            violations.push_back(r.id + ": keylog missing: " + r.keylog_path);
        if (!r.cursor_fixes_path.empty() &&
            !std::filesystem::is_regular_file(base_dir / r.cursor_fixes_path))
            violations.push_back(r.id + ": cursor fixes missing: " + r.cursor_fixes_path);

        if (r.keyframe_s && r.keyframe_e) {
            if (*r.keyframe_s < 0 || *r.keyframe_s >= *r.keyframe_e)
                violations.push_back(r.id + ": keyframes not ordered");
            if (frame_count >= 0 && *r.keyframe_e >= frame_count)
                violations.push_back(r.id + ": keyframe_e " + std::to_string(*r.keyframe_e) +
                                     " >= frame count " + std::to_string(frame_count));
        }

        if (r.source == "synthetic") {
            ElementVector v = decompose(r.gt_caption);
            if (v.category == ActionCategory::Unknown)
                violations.push_back(r.id + ": synthetic caption does not parse: " +
                                     r.gt_caption);
        }
    }
    for (const auto& id : train_ids)
        if (test_ids.count(id))
            violations.push_back(id + ": id appears in both train and test splits");
    return violations;
}

void save_frames(const std::filesystem::path& dir, const std::vector<Image>& frames) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (std::size_t i = 0; i < frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%04zu.png", i);
        write_png(dir / name, frames[i]);
    }
}

int count_frames(const std::filesystem::path& dir) {
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("frame_") && name.ends_with(".png"))
            ++n;
    }
    return n;
}

std::vector<Image> load_frames(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("frame_") && name.ends_with(".png"))
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw Error("load_frames: no frame_*.png in " + dir.string());
    std::vector<Image> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths)
        frames.push_back(read_png(p));
    return frames;
}

} // namespace guicap
