#include <benchmark/benchmark.h>

#include "guicap/caption.hpp"
#include "guicap/cursor_ground.hpp"
#include "guicap/keyframe.hpp"
#include "guicap/metric.hpp"
#include "guicap/pipeline.hpp"
#include "guicap/png_io.hpp"
#include "guicap/prompting.hpp"
#include "guicap/scene_sim.hpp"

using namespace guicap;

namespace {

GeneratedSample make_sample() {
    static GeneratedSample sample =
        execute_action(make_default_scene(), script_for(ActionType::Drag, 1), 20);
    return sample;
}

void bench_render_sample(benchmark::State& state) {
    GuiScene scene = make_default_scene();
    ActionScript script = script_for(ActionType::LeftClick, 0);
    for (auto _ : state) {
        script.seed += 1;
        benchmark::DoNotOptimize(execute_action(scene, script, 20));
    }
}
BENCHMARK(bench_render_sample)->Unit(benchmark::kMillisecond);

void bench_detect_cursor(benchmark::State& state) {
    Image frame = make_sample().frames[10];
    auto library = default_sprite_library();
    for (auto _ : state)
        benchmark::DoNotOptimize(detect(frame, library));
}
BENCHMARK(bench_detect_cursor)->Unit(benchmark::kMillisecond);

void bench_png_encode(benchmark::State& state) {
    Image frame = make_sample().frames[0];
    for (auto _ : state)
        benchmark::DoNotOptimize(encode_png(frame));
}
BENCHMARK(bench_png_encode)->Unit(benchmark::kMillisecond);

void bench_embed_crop(benchmark::State& state) {
    Image frame = make_sample().frames[10];
    Image c = crop(frame, prompt_box(240, 150, frame.width(), frame.height(), 128));
    for (auto _ : state)
        benchmark::DoNotOptimize(embed(c));
}
BENCHMARK(bench_embed_crop)->Unit(benchmark::kMicrosecond);

void bench_heuristic_keyframes(benchmark::State& state) {
    auto sample = make_sample();
    auto [frames, indices] = sample_uniform(sample.frames, 10);
    std::vector<Image> crops;
    for (const auto& f : frames)
        crops.push_back(crop(f, prompt_box(240, 150, f.width(), f.height(), 128)));
    for (auto _ : state)
        benchmark::DoNotOptimize(heuristic_keyframes(crops));
}
BENCHMARK(bench_heuristic_keyframes)->Unit(benchmark::kMicrosecond);

void bench_scoring_head_forward(benchmark::State& state) {
    auto sample = make_sample();
    auto [frames, indices] = sample_uniform(sample.frames, 10);
    std::vector<Image> crops;
    for (const auto& f : frames)
        crops.push_back(crop(f, prompt_box(240, 150, f.width(), f.height(), 128)));
    FrameFeatures feats = embed_all(crops);
    ScoringHead head = ScoringHead::make_default(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(head.score(feats));
}
BENCHMARK(bench_scoring_head_forward)->Unit(benchmark::kMicrosecond);

void bench_build_query(benchmark::State& state) {
    Image frame = make_sample().frames[10];
    PromptedFrame pf = make_prompted_frame(frame, 240, 150, 128);
    QueryConfig qc;
    qc.sample_id = "bench";
    for (auto _ : state)
        benchmark::DoNotOptimize(build_query(frame, frame, pf, pf, qc));
}
BENCHMARK(bench_build_query)->Unit(benchmark::kMillisecond);

void bench_score_sample(benchmark::State& state) {
    const std::string pred =
        "Drag the keyframe marker from timeline start to panel B to extend the clip";
    const std::string gt =
        "Drag the keyframe marker from timeline start to timeline end to extend the clip";
    for (auto _ : state)
        benchmark::DoNotOptimize(score_sample(pred, gt));
}
BENCHMARK(bench_score_sample)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
