// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "qpath/batch.hpp"
#include "qpath/kernels.hpp"
#include "qpath/map_image.hpp"
#include "qpath/suite.hpp"

using namespace qpath;

namespace {

GrayImage noise_image(int w, int h) {
    Rng rng(1);
    GrayImage img{w, h, {}};
    img.pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

BoolGrid noise_grid(int n) {
    Rng rng(2);
    BoolGrid g(n, n);
    for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] = rng.bernoulli(0.25) ? 1 : 0;
    return g;
}

std::vector<BatchScenario> scenarios() {
    std::vector<BatchScenario> out;
    int i = 0;
    for (const ScenarioSpec& s : dynamic_suite(16, 5)) out.push_back({"d" + std::to_string(i++), s, {}});
    return out;
}

void BM_ingest(benchmark::State& state) {
    const GrayImage img = noise_image(2000, 2000);
    for (auto _ : state) benchmark::DoNotOptimize(ingest_map_image(img, 128, 400, 400));
}
void BM_ingest_serial(benchmark::State& state) {
    const GrayImage img = noise_image(2000, 2000);
    for (auto _ : state) benchmark::DoNotOptimize(ingest_map_image_serial(img, 128, 400, 400));
}

void BM_density_field(benchmark::State& state) {
    const BoolGrid g = noise_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::density_field(g, 2));
}
void BM_density_field_serial(benchmark::State& state) {
    const BoolGrid g = noise_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::density_field_serial(g, 2));
}

const std::vector<PlannerKind> kPlanners{PlannerKind::Hybrid, PlannerKind::AstarReplan};

void BM_run_batch(benchmark::State& state) {
    const auto s = scenarios();
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(s, kPlanners));
}
void BM_run_batch_serial(benchmark::State& state) {
    const auto s = scenarios();
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(s, kPlanners));
}

}  // namespace

BENCHMARK(BM_ingest)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ingest_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density_field)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_density_field_serial)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_run_batch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_batch_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
