#include <benchmark/benchmark.h>

#include <random>

#include "tsdet/anchors.hpp"
#include "tsdet/merge.hpp"
#include "tsdet/target_coding.hpp"

namespace {

std::vector<tsdet::Detection> random_detections(std::size_t n) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> pos(0, 3000), size(20, 90), score(0, 1);
  std::uniform_int_distribution<int> cls(0, 20);
  std::vector<tsdet::Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(gen), y = pos(gen) * 0.6;
    out.push_back({{x, y, x + size(gen), y + size(gen)}, cls(gen), score(gen)});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  const auto dets = random_detections(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsdet::iou(dets[i & 1023].bbox, dets[(i + 1) & 1023].bbox));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_Nms(benchmark::State& state) {
  const auto dets = random_detections(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::nms(dets));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Nms)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_GeneratePyramid(benchmark::State& state) {
  const auto cfg = tsdet::AnchorConfig::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::generate_pyramid(cfg, 400, 400));
}
BENCHMARK(BM_GeneratePyramid);

void BM_AssignAnchors(benchmark::State& state) {
  const auto anchors = tsdet::generate_pyramid(tsdet::AnchorConfig::defaults(), 400, 400);
  const std::vector<tsdet::BBox> gts{{180, 180, 230, 230}, {40, 300, 90, 350}, {320, 20, 370, 75}};
  for (auto _ : state) benchmark::DoNotOptimize(tsdet::assign_anchors(std::span<const tsdet::Anchor>(anchors), gts));
}
BENCHMARK(BM_AssignAnchors);

}  // namespace
