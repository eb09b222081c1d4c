#pragma once

#include "guicap/caption.hpp"
#include "guicap/config.hpp"
#include "guicap/cursor_ground.hpp"
#include "guicap/datasets.hpp"
#include "guicap/keyframe.hpp"
#include "guicap/metric.hpp"
#include "guicap/scene_sim.hpp"
#include "guicap/scoring_head.hpp"

#include <filesystem>
#include <functional>

namespace guicap {

/// Editor-style layout with one widget per action class, used by the
/// synthetic collector.
GuiScene make_default_scene();

/// Canonical script for an action class against the default scene.
ActionScript script_for(ActionType action, std::uint64_t seed);

struct GenerateOptions {
    int count = 20;
    std::uint64_t seed = 0;
    int num_frames = 20;
    std::string split = "train";
    std::vector<ActionType> mix = {ActionType::LeftClick, ActionType::RightClick,
                                   ActionType::DoubleClick, ActionType::Drag,
                                   ActionType::Type};
};

/// Renders samples under out_dir/<id>/ and writes out_dir/manifest.jsonl.
std::vector<SampleRecord> generate_dataset(const std::filesystem::path& out_dir,
                                           const GenerateOptions& options);

void save_fixes(const std::filesystem::path& path, const std::vector<CursorFix>& fixes);
std::vector<CursorFix> load_fixes(const std::filesystem::path& path);

/// Maps a raw-frame ground-truth bracket into the sampled index domain.
std::pair<int, int> map_gt_to_sampled(int gt_s, int gt_e, const std::vector<int>& indices);

struct StageResult {
    int processed = 0;
    int skipped = 0;
};

StageResult stage_detect_cursor(const std::filesystem::path& manifest_path,
                                const PipelineConfig& config, bool force = false);
StageResult stage_keyframes(const std::filesystem::path& manifest_path,
                            const PipelineConfig& config, bool force = false);
StageResult stage_caption(const std::filesystem::path& manifest_path,
                          const PipelineConfig& config, bool force = false);
/// Scores all predictions, writes per-record scores back, and (optionally)
/// emits the report as text + JSON next to the manifest.
ScoreReport stage_evaluate(const std::filesystem::path& manifest_path,
                           const PipelineConfig& config, bool write_report = true);

struct TrainOutcome {
    TrainReport report;
    double model_accuracy = 0.0;     // held-out top-2 exact match
    double heuristic_accuracy = 0.0; // same measure, same held-out set
    int train_samples = 0;
    int holdout_samples = 0;
};

TrainOutcome stage_train_head(const std::filesystem::path& manifest_path,
                              const PipelineConfig& config, int epochs, float lr,
                              const std::filesystem::path& weights_out);

/// Runs fn(0..n) across up to `jobs` worker threads; rethrows the first
/// worker exception.
void run_parallel(int jobs, int n, const std::function<void(int)>& fn);

} // namespace guicap
