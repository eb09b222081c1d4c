// Command-line front end over the capture/caption pipeline stages.
#include <CLI11.hpp>

#include "guicap/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <string>

namespace {

using guicap::PipelineConfig;

struct CommonOpts {
    std::string manifest;
    std::string config_path;
    std::vector<std::string> overrides; // key=value pairs
    PipelineConfig resolved;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_manifest = true) {
    auto* m = cmd->add_option("--manifest", opts.manifest, "Dataset manifest (JSONL)");
    if (needs_manifest)
        m->required();
    cmd->add_option("--config", opts.config_path, "TOML config file");
    cmd->add_option("--set", opts.overrides,
                    "Config override key=value (repeatable, applied after --config)");

    // common flag shortcuts; stored as overrides so precedence is uniform
    auto alias = [cmd, &opts](const std::string& flag, const std::string& key,
                              const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&opts, key](const std::string& v) { opts.overrides.push_back(key + "=" + v); },
            help);
    };
    alias("--jobs", "jobs", "Worker threads");
    alias("--seed", "seed", "RNG seed");
    alias("--keyframe-strategy", "keyframe.strategy",
          "model | heuristic | start_end | ground_truth");
    alias("--backend", "backend.kind", "remote | oracle | stub");
    alias("--head", "keyframe.head_path", "Scoring head weights file");
    cmd->add_option_function<int>(
           "--s-box",
           [&opts](int v) { opts.overrides.push_back("prompt.s_box=" + std::to_string(v)); },
           "Prompt box side in pixels")
        ->check(CLI::IsMember({128, 256, 512, 768}));
    cmd->add_flag_callback("--no-crop",
                           [&opts] { opts.overrides.push_back("prompt.use_crop=false"); },
                           "Drop the cropped close-up images from the query");
    cmd->add_flag_callback("--no-annotate",
                           [&opts] { opts.overrides.push_back("prompt.use_annotation=false"); },
                           "Drop the visual box annotation from the query");
    cmd->add_flag_callback("--dump-prompts",
                           [&opts] { opts.overrides.push_back("dump_prompts=true"); },
                           "Write the assembled prompt images next to each sample");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig config;
    if (!opts.config_path.empty())
        config = guicap::load_config(opts.config_path);
    for (const auto& kv : opts.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw guicap::Error("--set expects key=value, got '" + kv + "'");
        guicap::apply_config_key(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.validate();
    return config;
}

void log_run(const PipelineConfig& config) {
    std::printf("config_hash=%016" PRIx64 " seed=%" PRIu64 "\n", config.hash(), config.seed);
}

void print_stage(const char* name, const guicap::StageResult& r) {
    std::printf("%s: processed=%d skipped=%d\n", name, r.processed, r.skipped);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GUI action video narration pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    guicap::GenerateOptions gen;
    std::string out_dir;
    int epochs = 300;
    float lr = 3e-4f;
    std::string weights_out = "keyframe_head.bin";
    bool force = false;

    auto* c_generate = app.add_subcommand("generate", "Render a synthetic dataset");
    add_common(c_generate, opts, /*needs_manifest=*/false);
    c_generate->add_option("--out", out_dir, "Output dataset directory")->required();
    c_generate->add_option("--count", gen.count, "Number of samples");
    c_generate->add_option("--frames", gen.num_frames, "Raw frames per sample");
    c_generate->add_option("--split", gen.split, "train | test")
        ->check(CLI::IsMember({"train", "test"}));

    auto* c_detect = app.add_subcommand("detect-cursor", "Locate the cursor in sampled frames");
    add_common(c_detect, opts);
    c_detect->add_flag("--force", force, "Recompute even when artifacts exist");

    auto* c_keyframes = app.add_subcommand("keyframes", "Select start/end keyframes");
    add_common(c_keyframes, opts);
    c_keyframes->add_flag("--force", force, "Recompute even when artifacts exist");

    auto* c_caption = app.add_subcommand("caption", "Query the caption backend");
    add_common(c_caption, opts);
    c_caption->add_flag("--force", force, "Recompute even when artifacts exist");

    auto* c_evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    add_common(c_evaluate, opts);

    auto* c_pipeline = app.add_subcommand("pipeline", "detect-cursor + keyframes + caption + evaluate");
    add_common(c_pipeline, opts);
    c_pipeline->add_flag("--force", force, "Recompute even when artifacts exist");

    auto* c_train = app.add_subcommand("train-keyframe-head", "Train the keyframe scoring head");
    add_common(c_train, opts);
    c_train->add_option("--epochs", epochs, "Training epochs");
    c_train->add_option("--lr", lr, "Adam learning rate");
    c_train->add_option("--weights-out", weights_out, "Output weights path");

    auto* c_stats = app.add_subcommand("stats", "Manifest statistics and integrity checks");
    add_common(c_stats, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig config = resolve_config(opts);

        if (c_generate->parsed()) {
            gen.seed = config.seed;
            log_run(config);
            auto records = generate_dataset(out_dir, gen);
            std::printf("generate: wrote %zu samples under %s\n", records.size(),
                        out_dir.c_str());
            return 0;
        }

        if (c_stats->parsed()) {
            auto records = guicap::load_manifest(opts.manifest);
            auto s = guicap::stats(records);
            std::fputs(s.format_table().c_str(), stdout);
            auto base = std::filesystem::path(opts.manifest).parent_path();
            auto violations = guicap::validate(records, base.empty() ? "." : base);
            for (const auto& v : violations)
                std::printf("violation: %s\n", v.c_str());
            return violations.empty() ? 0 : 1;
        }

        log_run(config);
        if (c_detect->parsed() || c_pipeline->parsed())
            print_stage("detect-cursor", guicap::stage_detect_cursor(opts.manifest, config, force));
        if (c_keyframes->parsed() || c_pipeline->parsed())
            print_stage("keyframes", guicap::stage_keyframes(opts.manifest, config, force));
        if (c_caption->parsed() || c_pipeline->parsed())
            print_stage("caption", guicap::stage_caption(opts.manifest, config, force));
        if (c_evaluate->parsed() || c_pipeline->parsed()) {
            auto report = guicap::stage_evaluate(opts.manifest, config);
            std::fputs(report.format_table().c_str(), stdout);
        }
        if (c_train->parsed()) {
            auto outcome = guicap::stage_train_head(opts.manifest, config, epochs, lr, weights_out);
            std::printf("train: samples=%d holdout=%d loss %.4f -> %.4f\n",
                        outcome.train_samples, outcome.holdout_samples,
                        outcome.report.initial_loss, outcome.report.final_loss);
            std::printf("train: model_accuracy=%.3f heuristic_accuracy=%.3f weights=%s\n",
                        outcome.model_accuracy, outcome.heuristic_accuracy,
                        weights_out.c_str());
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
