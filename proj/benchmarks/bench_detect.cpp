#include <benchmark/benchmark.h>

#include "tsdet/crop.hpp"
#include "tsdet/synth.hpp"

namespace {

const tsdet::Scene& scene() {
  static const tsdet::Scene s = [] {
    tsdet::SceneSpec spec;
    spec.seed = 7;
    return tsdet::generate_scene(spec);
  }();
  return s;
}

void BM_GenerateScene(benchmark::State& state) {
  tsdet::SceneSpec spec;
  spec.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::generate_scene(spec));
}
BENCHMARK(BM_GenerateScene)->Unit(benchmark::kMillisecond);

void BM_BlobDetectTile(benchmark::State& state) {
  const tsdet::ImageBuffer tile = scene().image.crop(1400, 700, 400, 400);
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::blob_detect(tile));
}
BENCHMARK(BM_BlobDetectTile)->Unit(benchmark::kMicrosecond);

void BM_BlobDetectFullFrame(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::blob_detect(scene().image));
}
BENCHMARK(BM_BlobDetectFullFrame)->Unit(benchmark::kMillisecond);

}  // namespace
