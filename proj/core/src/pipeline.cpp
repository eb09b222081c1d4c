#include "guicap/pipeline.hpp"

#include "guicap/png_io.hpp"
#include "guicap/prompting.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace guicap {
namespace {

std::vector<SampleRecord> load_and_check(const std::filesystem::path& manifest_path) {
    auto records = load_manifest(manifest_path);
    if (records.empty())
        throw Error("manifest is empty: " + manifest_path.string());
    return records;
}

std::filesystem::path manifest_dir(const std::filesystem::path& manifest_path) {
    auto dir = manifest_path.parent_path();
    return dir.empty() ? "." : dir;
}

struct SampledFrames {
    std::vector<Image> frames;
    std::vector<int> indices;
};

SampledFrames load_sampled(const std::filesystem::path& base, const SampleRecord& rec,
                           int n) {
    auto raw = load_frames(base / rec.frames_dir);
    auto [frames, indices] = sample_uniform(raw, n);
    return {std::move(frames), std::move(indices)};
}

// A box wider than the frame degenerates to the whole frame.
int effective_box(int s_box, const Image& frame) {
    return std::min(s_box, std::min(frame.width(), frame.height()));
}

// Crops for the frame-diff heuristic share one box, anchored where the
// cursor ends up (the action site). Re-centering per frame would make
// background panning dominate the frame-to-frame diffs and drown out the
// action transition.
std::vector<Image> anchored_crops(const std::vector<Image>& frames,
                                  const std::vector<CursorFix>& fixes, int s_box) {
    std::vector<Image> crops;
    crops.reserve(frames.size());
    const CursorFix& anchor = fixes.back();
    for (const auto& frame : frames) {
        int s = effective_box(s_box, frame);
        PromptBox box = prompt_box(anchor.x, anchor.y, frame.width(), frame.height(), s);
        crops.push_back(crop(frame, box));
    }
    return crops;
}

// Crops for the scoring head follow the cursor: each frame is cropped around
// its own fix, so the embedding sees what the pointer is over rather than a
// fixed site window. Anchors snap to the 16 px embedding grid so detector
// jitter cannot shift the downsample cell boundaries between frames.
std::vector<Image> cursor_crops(const std::vector<Image>& frames,
                                const std::vector<CursorFix>& fixes, int s_box) {
    std::vector<Image> crops;
    crops.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Image& frame = frames[i];
        int s = effective_box(s_box, frame);
        int ax = fixes[i].x / 16 * 16;
        int ay = fixes[i].y / 16 * 16;
        PromptBox box = prompt_box(ax, ay, frame.width(), frame.height(), s);
        crops.push_back(crop(frame, box));
    }
    return crops;
}

} // namespace

GuiScene make_default_scene() {
    GuiScene scene;
    scene.width = 480;
    scene.height = 300;
    scene.panels = {
        {"preview", {10, 10, 220, 180}},
        {"inspector", {240, 10, 230, 180}},
        {"timeline", {10, 200, 460, 90}},
    };
    scene.widgets = {
        {"btn_export", "Export", WidgetKind::Button, {250, 20, 80, 24}},
        {"icon_save", "Save", WidgetKind::Icon, {345, 20, 60, 24}},
        {"menu_open", "Open", WidgetKind::MenuItem, {250, 60, 80, 20}},
        {"field_search", "search box", WidgetKind::TextField, {250, 100, 170, 24}},
        {"handle_marker", "keyframe marker", WidgetKind::Handle, {30, 240, 44, 18}},
    };
    return scene;
}

ActionScript script_for(ActionType action, std::uint64_t seed) {
    ActionScript script;
    script.action = action;
    script.seed = seed;
    switch (action) {
        case ActionType::LeftClick: script.target_widget = "btn_export"; break;
        case ActionType::RightClick: script.target_widget = "icon_save"; break;
        case ActionType::DoubleClick: script.target_widget = "menu_open"; break;
        case ActionType::Drag:
            script.target_widget = "handle_marker";
            script.drag_from = "timeline";
            script.drag_to = "preview";
            script.purpose = "move the clip";
            break;
        case ActionType::Type:
            script.target_widget = "field_search";
            script.typed_text = "hello";
            break;
    }
    return script;
}

std::vector<SampleRecord> generate_dataset(const std::filesystem::path& out_dir,
                                           const GenerateOptions& options) {
    if (options.count < 1)
        throw Error("generate: count must be >= 1");
    if (options.mix.empty())
        throw Error("generate: empty action mix");
    std::filesystem::create_directories(out_dir);
    GuiScene scene = make_default_scene();

    std::vector<SampleRecord> records(options.count);
    run_parallel(static_cast<int>(std::thread::hardware_concurrency()), options.count,
                 [&](int i) {
        ActionType action = options.mix[i % options.mix.size()];
        ActionScript script = script_for(action, options.seed + static_cast<std::uint64_t>(i));
        GeneratedSample sample = execute_action(scene, script, options.num_frames);

        char id[48];
        std::snprintf(id, sizeof(id), "synth-%05d-%s", i, to_string(action).c_str());
        auto sample_dir = out_dir / id;
        save_frames(sample_dir, sample.frames);
        sample.keylog.save(sample_dir / "key.log");

        SampleRecord rec;
        rec.id = id;
        rec.split = options.split;
        rec.frames_dir = id;
        rec.keylog_path = std::string(id) + "/key.log";
        rec.gt_caption = sample.gt_caption;
        rec.action_class = to_string(action);
        rec.source = "synthetic";
        rec.gt_keyframe_s = sample.gt_start;
        rec.gt_keyframe_e = sample.gt_end;
        records[i] = std::move(rec);
    });

    write_manifest(out_dir / "manifest.jsonl", records);
    return records;
}

void save_fixes(const std::filesystem::path& path, const std::vector<CursorFix>& fixes) {
    std::ostringstream out;
    for (const auto& f : fixes)
        out << f.frame_idx << ' ' << f.x << ' ' << f.y << ' ' << f.confidence << '\n';
    std::ofstream file(path, std::ios::trunc);
    if (!file)
        throw Error("cannot write cursor fixes: " + path.string());
    file << out.str();
}

std::vector<CursorFix> load_fixes(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file)
        throw Error("cannot open cursor fixes: " + path.string());
    std::vector<CursorFix> fixes;
    CursorFix f;
    while (file >> f.frame_idx >> f.x >> f.y >> f.confidence)
        fixes.push_back(f);
    return fixes;
}

std::pair<int, int> map_gt_to_sampled(int gt_s, int gt_e, const std::vector<int>& indices) {
    const int n = static_cast<int>(indices.size());
    int s = 0, e = n - 1;
    for (int i = 0; i < n; ++i)
        if (indices[i] <= gt_s)
            s = i;
    for (int i = n - 1; i >= 0; --i)
        if (indices[i] >= gt_e)
            e = i;
    if (s >= e) {
        if (e < n - 1)
            e = s + 1;
        else
            s = e - 1;
    }
    return {s, e};
}

void run_parallel(int jobs, int n, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

StageResult stage_detect_cursor(const std::filesystem::path& manifest_path,
                                const PipelineConfig& config, bool force) {
    auto records = load_and_check(manifest_path);
    auto base = manifest_dir(manifest_path);
    StageResult result;

    std::unique_ptr<CursorDetector> detector;
    if (config.cursor_detector_url.empty())
        detector = std::make_unique<TemplateMatchDetector>(default_sprite_library(),
                                                           config.match_threshold);
    else
        detector = std::make_unique<HttpCursorDetector>(config.cursor_detector_url);

    std::atomic<int> processed{0}, skipped{0};
    run_parallel(config.jobs, static_cast<int>(records.size()), [&](int i) {
        auto& rec = records[i];
        auto fixes_path = base / rec.frames_dir / "cursor_fixes.txt";
        if (!force && !rec.cursor_fixes_path.empty() &&
            std::filesystem::exists(base / rec.cursor_fixes_path)) {
            ++skipped;
            return;
        }
        auto sampled = load_sampled(base, rec, config.sample_count);
        auto fixes = detect_sequence(*detector, sampled.frames);
        save_fixes(fixes_path, fixes);
        rec.cursor_fixes_path = rec.frames_dir + "/cursor_fixes.txt";
        ++processed;
    });

    write_manifest(manifest_path, records);
    result.processed = processed;
    result.skipped = skipped;
    return result;
}

StageResult stage_keyframes(const std::filesystem::path& manifest_path,
                            const PipelineConfig& config, bool force) {
    auto records = load_and_check(manifest_path);
    auto base = manifest_dir(manifest_path);
    auto strategy = strategy_from_string(config.keyframe_strategy);
    if (!strategy)
        throw Error("unknown keyframe strategy: " + config.keyframe_strategy);

    std::unique_ptr<ScoringHead> head;
    if (*strategy == KeyframeStrategy::Model) {
        if (config.head_path.empty())
            throw Error("keyframe strategy 'model' needs keyframe.head_path");
        head = std::make_unique<ScoringHead>(ScoringHead::load(config.head_path));
    }

    std::atomic<int> processed{0}, skipped{0};
    run_parallel(config.jobs, static_cast<int>(records.size()), [&](int i) {
        auto& rec = records[i];
        if (!force && rec.keyframe_s && rec.keyframe_e &&
            rec.keyframe_strategy == config.keyframe_strategy) {
            ++skipped;
            return;
        }
        KeyframeSelection sel;
        switch (*strategy) {
            case KeyframeStrategy::StartEnd:
                sel = start_end_keyframes(config.sample_count);
                break;
            case KeyframeStrategy::GroundTruth: {
                if (!rec.gt_keyframe_s || !rec.gt_keyframe_e)
                    throw Error(rec.id + ": no ground-truth keyframes in manifest");
                auto sampled = load_sampled(base, rec, config.sample_count);
                auto [s, e] = map_gt_to_sampled(*rec.gt_keyframe_s, *rec.gt_keyframe_e,
                                                sampled.indices);
                sel = {s, e, KeyframeStrategy::GroundTruth};
                break;
            }
            case KeyframeStrategy::Heuristic:
            case KeyframeStrategy::Model: {
                if (rec.cursor_fixes_path.empty())
                    throw Error(rec.id + ": cursor fixes required; run detect-cursor first");
                auto sampled = load_sampled(base, rec, config.sample_count);
                auto fixes = load_fixes(base / rec.cursor_fixes_path);
                if (*strategy == KeyframeStrategy::Heuristic) {
                    auto crops = anchored_crops(sampled.frames, fixes, config.s_box);
                    sel = heuristic_keyframes(crops);
                } else {
                    auto crops = cursor_crops(sampled.frames, fixes, config.s_box);
                    auto scores = head->score(embed_all(crops));
                    sel = select_keyframes(scores);
                }
                break;
            }
        }
        rec.keyframe_s = sel.s;
        rec.keyframe_e = sel.e;
        rec.keyframe_strategy = config.keyframe_strategy;
        ++processed;
    });

    write_manifest(manifest_path, records);
    return {processed, skipped};
}

StageResult stage_caption(const std::filesystem::path& manifest_path,
                          const PipelineConfig& config, bool force) {
    auto records = load_and_check(manifest_path);
    auto base = manifest_dir(manifest_path);

    RemoteConfig remote{config.backend_url, config.backend_model, config.backend_auth_env,
                        3, config.backend_backoff_ms};
    auto backend = make_backend(config.backend_kind, remote, config.stub_reply);
    if (auto* oracle = dynamic_cast<OracleBackend*>(backend.get()))
        for (const auto& rec : records)
            oracle->register_caption(rec.id, rec.gt_caption);

    int jobs = config.jobs;
    if (config.backend_kind == "remote")
        jobs = std::min(jobs, config.backend_max_inflight);

    std::mutex backend_mutex;
    std::atomic<int> processed{0}, skipped{0};
    run_parallel(jobs, static_cast<int>(records.size()), [&](int i) {
        auto& rec = records[i];
        if (!force && !rec.prediction.empty()) {
            ++skipped;
            return;
        }
        if (!rec.keyframe_s || !rec.keyframe_e)
            throw Error(rec.id + ": keyframes required; run keyframes first");
        if (rec.cursor_fixes_path.empty())
            throw Error(rec.id + ": cursor fixes required; run detect-cursor first");

        auto sampled = load_sampled(base, rec, config.sample_count);
        auto fixes = load_fixes(base / rec.cursor_fixes_path);
        int s = *rec.keyframe_s, e = *rec.keyframe_e;
        int sb = effective_box(config.s_box, sampled.frames[s]);
        PromptedFrame ps = make_prompted_frame(sampled.frames[s], fixes[s].x, fixes[s].y, sb);
        PromptedFrame pe = make_prompted_frame(sampled.frames[e], fixes[e].x, fixes[e].y, sb);

        QueryConfig qc;
        qc.use_annotation = config.use_annotation;
        qc.use_crop = config.use_crop;
        qc.resize_w = config.resize_w;
        qc.resize_h = config.resize_h;
        qc.sample_id = rec.id;
        qc.strategy = rec.keyframe_strategy;
        qc.s_box = sb;
        CaptionQuery query = build_query(sampled.frames[s], sampled.frames[e], ps, pe, qc);

        if (config.dump_prompts) {
            auto dir = base / rec.frames_dir;
            write_png(dir / "prompt_annotated_s.png", ps.annotated);
            write_png(dir / "prompt_annotated_e.png", pe.annotated);
            write_png(dir / "prompt_cropped_s.png", ps.cropped);
            write_png(dir / "prompt_cropped_e.png", pe.cropped);
        }

        CaptionResult res;
        {
            // backend implementations are not required to be thread-safe
            std::scoped_lock lock(backend_mutex);
            res = backend->caption(query);
        }
        rec.prediction = res.text;
        ++processed;
    });

    write_manifest(manifest_path, records);
    return {processed, skipped};
}

ScoreReport stage_evaluate(const std::filesystem::path& manifest_path,
                           const PipelineConfig& config, bool write_report) {
    auto records = load_and_check(manifest_path);
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(records.size());
    for (auto& rec : records) {
        if (rec.prediction.empty())
            throw Error(rec.id + ": missing prediction artifact; run caption first");
        pairs.emplace_back(rec.prediction, rec.gt_caption);
        rec.score = score_sample(rec.prediction, rec.gt_caption).iou;
    }
    ScoreReport report = score_dataset(pairs);
    write_manifest(manifest_path, records);

    if (write_report) {
        auto base = manifest_dir(manifest_path);
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(config.hash()));
        {
            std::ofstream txt(base / "report.txt", std::ios::trunc);
            txt << report.format_table() << "config_hash=" << hash
                << " seed=" << config.seed << '\n';
        }
        nlohmann::json j;
        j["config_hash"] = hash;
        j["seed"] = config.seed;
        j["average"] = report.average;
        for (const auto& [cat, score] : report.per_category)
            j["per_category"][to_string(cat)] = score;
        for (const auto& [cat, n] : report.n_samples)
            j["n_samples"][to_string(cat)] = n;
        std::ofstream js(base / "report.json", std::ios::trunc);
        js << j.dump(2) << '\n';
    }
    return report;
}

TrainOutcome stage_train_head(const std::filesystem::path& manifest_path,
                              const PipelineConfig& config, int epochs, float lr,
                              const std::filesystem::path& weights_out) {
    auto records = load_and_check(manifest_path);
    auto base = manifest_dir(manifest_path);

    struct Prepared {
        TrainSample sample;
        std::vector<Image> crops;
    };
    std::vector<Prepared> prepared(records.size());
    run_parallel(config.jobs, static_cast<int>(records.size()), [&](int i) {
        const auto& rec = records[i];
        if (!rec.gt_keyframe_s || !rec.gt_keyframe_e)
            throw Error(rec.id + ": no ground-truth keyframes in manifest");
        auto sampled = load_sampled(base, rec, config.sample_count);
        std::vector<CursorFix> fixes;
        if (!rec.cursor_fixes_path.empty() &&
            std::filesystem::exists(base / rec.cursor_fixes_path))
            fixes = load_fixes(base / rec.cursor_fixes_path);
        else
            fixes = detect_sequence(sampled.frames, default_sprite_library(),
                                    config.match_threshold);
        auto crops = cursor_crops(sampled.frames, fixes, config.s_box);
        auto [s, e] = map_gt_to_sampled(*rec.gt_keyframe_s, *rec.gt_keyframe_e,
                                        sampled.indices);
        prepared[i] = {{embed_all(crops), s, e}, std::move(crops)};
    });

    // test split is the hold-out when present, else the last 20%
    std::vector<int> train_idx, holdout_idx;
    bool has_test = std::any_of(records.begin(), records.end(),
                                [](const auto& r) { return r.split == "test"; });
    for (int i = 0; i < static_cast<int>(records.size()); ++i) {
        bool holdout = has_test ? records[i].split == "test"
                                : i >= static_cast<int>(records.size()) * 4 / 5;
        (holdout ? holdout_idx : train_idx).push_back(i);
    }
    if (train_idx.empty() || holdout_idx.empty())
        throw Error("train-keyframe-head: need both train and hold-out samples");

    std::vector<TrainSample> train_set;
    train_set.reserve(train_idx.size());
    for (int i : train_idx)
        train_set.push_back(prepared[i].sample);

    TrainOutcome outcome;
    ScoringHead head = train_head(train_set, epochs, lr, config.seed, &outcome.report);
    head.save(weights_out);

    int model_hits = 0, heuristic_hits = 0;
    for (int i : holdout_idx) {
        const auto& p = prepared[i];
        auto sel = select_keyframes(head.score(p.sample.feats));
        if (sel.s == p.sample.gt_s && sel.e == p.sample.gt_e)
            ++model_hits;
        auto h = heuristic_keyframes(p.crops);
        if (h.s == p.sample.gt_s && h.e == p.sample.gt_e)
            ++heuristic_hits;
    }
    outcome.model_accuracy = static_cast<double>(model_hits) / holdout_idx.size();
    outcome.heuristic_accuracy = static_cast<double>(heuristic_hits) / holdout_idx.size();
    outcome.train_samples = static_cast<int>(train_idx.size());
    outcome.holdout_samples = static_cast<int>(holdout_idx.size());
    return outcome;
}

} // namespace guicap
