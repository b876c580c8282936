// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/parallel.hpp"
#include "oracles/oracles.hpp"
#include "tsdet/anchors.hpp"
#include "tsdet/crop.hpp"
#include "tsdet/eval.hpp"
#include "tsdet/losses.hpp"
#include "tsdet/merge.hpp"
#include "tsdet/synth.hpp"
#include "tsdet/target_coding.hpp"

namespace {

using namespace tsdet;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

BBox random_int_box(std::mt19937& gen, int extent, int max_size) {
  std::uniform_int_distribution<int> pos(0, extent), size(1, max_size);
  const double x = pos(gen), y = pos(gen);
  return {x, y, x + size(gen), y + size(gen)};
}

struct PipelineRun {
  MetricsReport report;
  double seconds = 0;
};

PipelineRun pipeline(std::uint64_t seed, int images, const std::string& weather, std::vector<int> exclude) {
  cli::RunConfig cfg;
  cli::PipelineOptions opt;
  opt.scene.seed = seed;
  opt.scene.images = images;
  opt.scene.weather = weather;
  opt.scene.exclude_classes = std::move(exclude);
  std::ostringstream out, log;
  const auto t0 = Clock::now();
  PipelineRun r;
  r.report = cli::run_pipeline(cfg, opt, cli::default_jobs(), out, log);
  r.seconds = seconds_since(t0);
  return r;
}

constexpr std::uint64_t kSeed = 7;
constexpr int kImages = 50;
const std::vector<int> kNoSpeedLimits{kConfusableClassA, kConfusableClassB};

Outcome end_to_end_clear(PipelineRun& clear) {
  Outcome o;
  clear = pipeline(kSeed, kImages, "clear", kNoSpeedLimits);
  o.require(clear.report.overall.f1 >= 0.99, "F1 below 0.99");
  o.require(clear.seconds < 60.0, "slower than 60 s");
  o.detail += " F1=" + fmt(clear.report.overall.f1) + " time=" + fmt(clear.seconds) + "s";
  return o;
}

Outcome failure_modes(const PipelineRun& clear) {
  Outcome o;
  const PipelineRun snow = pipeline(kSeed, kImages, "snow", kNoSpeedLimits);
  o.require(snow.report.overall.f1 < clear.report.overall.f1, "snow F1 not below clear F1");
  const PipelineRun all = pipeline(kSeed, kImages, "clear", {});
  const long confused = all.report.confusion[kConfusableClassA][kConfusableClassB] +
                        all.report.confusion[kConfusableClassB][kConfusableClassA];
  o.require(confused > 0, "no 18/19 confusion");
  o.detail += " snowF1=" + fmt(snow.report.overall.f1) + " clearF1=" + fmt(clear.report.overall.f1) +
              " 18<->19=" + std::to_string(confused);
  return o;
}

Outcome anchor_geometry() {
  Outcome o;
  const AnchorConfig cfg = AnchorConfig::defaults();
  const auto anchors = generate_pyramid(cfg, 400, 400);
  o.require(anchors.size() == 60462, "count != 60462");
  o.require(anchors.size() == oracle::enumerate_anchor_count(cfg, 400, 400), "count differs from enumeration");
  for (const Anchor& a : anchors) {
    const PyramidLevel& lv = cfg.levels[static_cast<std::size_t>(a.level)];
    const double ratio = cfg.ratios[static_cast<std::size_t>(a.ratio_index)];
    const double scale = cfg.scales[static_cast<std::size_t>(a.scale_index)];
    const double side = lv.base_size * scale;
    const bool centred = std::abs(a.bbox.center_x() - (a.col + 0.5) * lv.stride) < 1e-9 &&
                         std::abs(a.bbox.center_y() - (a.row + 0.5) * lv.stride) < 1e-9;
    const bool area_ok = std::abs(a.bbox.area() - side * side) <= 1e-9 * side * side;
    const bool ratio_ok = std::abs(a.bbox.height() / a.bbox.width() - ratio) <= 1e-9 * ratio;
    if (!(centred && area_ok && ratio_ok)) {
      o.require(false, "anchor invariant violated at level " + lv.name);
      break;
    }
  }
  o.detail += " anchors=" + std::to_string(anchors.size());
  return o;
}

Outcome target_coding() {
  Outcome o;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> pos(-1000, 1000), size(0.5, 500);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double gx = pos(gen), gy = pos(gen), ax = pos(gen), ay = pos(gen);
    const BBox g{gx, gy, gx + size(gen), gy + size(gen)};
    const BBox a{ax, ay, ax + size(gen), ay + size(gen)};
    const BBox r = decode_box(encode_box(g, a), a);
    for (const auto [got, want] : {std::pair{r.xmin, g.xmin}, {r.ymin, g.ymin}, {r.xmax, g.xmax}, {r.ymax, g.ymax}})
      worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1.0));
  }
  o.require(worst <= 1e-9, "round trip error " + fmt(worst));

  std::mt19937 igen(12);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<BBox> anchors, gts;
    const int na = std::uniform_int_distribution<int>(1, 200)(igen);
    const int ng = std::uniform_int_distribution<int>(0, 5)(igen);
    for (int i = 0; i < na; ++i) anchors.push_back(random_int_box(igen, 24, 12));
    for (int j = 0; j < ng; ++j) gts.push_back(random_int_box(igen, 24, 12));
    const auto got = assign_anchors(std::span<const BBox>(anchors), gts, {0.5, 0.4});
    const auto ref = oracle::brute_force_assign(anchors, gts, 0.5, 0.4);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const bool same = got.anchors[i].label == ref[i].label &&
                        (ref[i].label != AnchorLabel::Positive || got.anchors[i].gt_index == ref[i].gt);
      if (!same) {
        ++mismatches;
        break;
      }
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " assignment mismatches");
  o.detail += " worst_rel=" + fmt(worst) + " assign_mismatch=" + std::to_string(mismatches);
  return o;
}

Outcome losses() {
  Outcome o;
  double worst = 0;
  for (const double alpha : {0.25, 0.5})
    for (const double gamma : {0.0, 1.0, 2.0, 5.0})
      for (int y = 0; y <= 1; ++y)
        for (int i = 1; i <= 19; ++i) {
          const double p = 0.05 * i;
          const FocalParams fp{alpha, gamma};
          const double num = oracle::central_difference([&](double q) { return focal_loss(q, y, fp); }, p, 1e-6);
          const double ana = focal_loss_grad(p, y, fp);
          worst = std::max(worst, std::abs(ana - num) / std::abs(num));
        }
  o.require(worst <= 1e-6, "gradient rel error " + fmt(worst));
  double ce = 0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    ce = std::max(ce, std::abs(focal_loss(p, 1, {1.0, 0.0}) + std::log(p)));
  }
  o.require(ce <= 1e-12, "cross-entropy mismatch " + fmt(ce));
  o.detail += " grad_rel=" + fmt(worst) + " ce_abs=" + fmt(ce);
  return o;
}

Outcome iou_check() {
  Outcome o;
  std::mt19937 gen(6);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const BBox a = random_int_box(gen, 40, 30), b = random_int_box(gen, 40, 30);
    worst = std::max(worst, std::abs(iou(a, b) - oracle::rasterized_iou(a, b)));
  }
  o.require(worst <= 1e-6, "rasterized mismatch " + fmt(worst));
  const double seventh = iou({0, 0, 10, 10}, {5, 5, 15, 15});
  o.require(std::abs(seventh - 1.0 / 7.0) <= 4 * std::numeric_limits<double>::epsilon(), "1/7 case");
  o.detail += " worst=" + fmt(worst);
  return o;
}

Outcome merge_check() {
  Outcome o;
  std::mt19937 gen(21);
  std::uniform_int_distribution<int> ntiles(1, 4), ndet(0, 12), origin(0, 3), cls(0, 3), score(0, 20);
  int mismatch = 0, not_idempotent = 0, order_dependent = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<TileDetections> tiles;
    std::vector<Detection> all;
    const int nt = ntiles(gen);
    for (int k = 0; k < nt; ++k) {
      TileDetections td{{origin(gen) * 30, origin(gen) * 30, 100, 100, "img"}, {}};
      const int nd = ndet(gen);
      for (int d = 0; d < nd; ++d)
        td.detections.push_back({random_int_box(gen, 70, 30), cls(gen), score(gen) / 20.0});
      for (const auto& d : to_global(td)) all.push_back(d);
      tiles.push_back(std::move(td));
    }
    const auto merged = merge_tiles(tiles);
    if (merged != oracle::brute_force_nms(all, kDefaultNmsIou)) ++mismatch;
    if (nms(merged) != merged) ++not_idempotent;
    // Distinct scores make the result order-free.
    for (std::size_t i = 0; i < all.size(); ++i) all[i].score = (static_cast<double>(i) + 0.5) / all.size();
    const auto ref = nms(all);
    std::shuffle(all.begin(), all.end(), gen);
    if (nms(all) != ref) ++order_dependent;
  }
  o.require(mismatch == 0, "differs from brute force");
  o.require(not_idempotent == 0, "not idempotent");
  o.require(order_dependent == 0, "depends on input order");
  o.detail += " mismatch=" + std::to_string(mismatch) + " non_idempotent=" + std::to_string(not_idempotent) +
              " order_dependent=" + std::to_string(order_dependent);
  return o;
}

GroundTruthRecord gt_box(const BBox& b, int cls) { return {"a", bbox_to_quad(b), cls}; }

Outcome evaluation_protocol() {
  Outcome o;
  {
    const std::vector<GroundTruthRecord> gts{gt_box({0, 0, 10, 10}, 1)};
    const std::vector<Detection> preds{{{0, 0, 10, 9}, 1, 1.0}};
    o.require(match_image(preds, gts).pairs.empty(), "IoU 0.9 matched");
  }
  {
    const std::vector<GroundTruthRecord> gts{gt_box({0, 0, 50, 50}, 3)};
    const std::vector<Detection> preds{{{0, 0, 50, 50}, 3, 1.0}};
    const auto r = score(match_image(preds, gts), preds, gts);
    o.require(r.overall.precision == 1 && r.overall.recall == 1 && r.overall.f1 == 1, "perfect example");
    const std::vector<Detection> two{{{0, 0, 50, 50}, 3, 1.0}, {{100, 100, 150, 150}, 3, 0.5}};
    const auto r2 = score(match_image(two, gts), two, gts);
    o.require(r2.overall.precision == 0.5 && r2.overall.recall == 1.0 && r2.overall.f1 == 2.0 / 3.0,
              "one extra prediction example");
  }
  o.require(f1_score(0.9, 0.8) == 2 * 0.9 * 0.8 / (0.9 + 0.8), "F1(0.9,0.8)");
  {
    MetricsReport a, b;
    a.overall.tp = 1, a.overall.fp = 1;
    b.overall.tp = 1, b.overall.fn = 1;
    a.recompute();
    b.recompute();
    const std::vector<MetricsReport> both{a, b};
    const auto r = aggregate(both);
    o.require(r.overall.precision == 2.0 / 3.0 && r.overall.recall == 2.0 / 3.0 && r.overall.f1 == 2.0 / 3.0,
              "aggregate example");
  }
  const auto tiles = grid_tiles(3200, 1800);
  o.require(tiles.size() == 66, "tile count " + std::to_string(tiles.size()));
  std::vector<unsigned char> hit(3200 * 1800, 0);
  for (const auto& t : tiles)
    for (int y = t.y0; y < t.y0 + t.height; ++y)
      std::fill_n(hit.begin() + static_cast<std::ptrdiff_t>(y) * 3200 + t.x0, t.width, 1);
  o.require(std::count(hit.begin(), hit.end(), 0) == 0, "uncovered pixels");
  o.detail += " tiles=" + std::to_string(tiles.size());
  return o;
}

Outcome crop_geometry() {
  Outcome o;
  std::mt19937 gen(9);
  std::uniform_int_distribution<int> x(0, 3200 - 80), y(0, 1800 - 80), size(30, 80), cls(0, 20);
  int interior = 0, edge = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x0 = x(gen), y0 = y(gen);
    const double s = size(gen);
    const LabeledQuad lq{bbox_to_quad({x0, y0, x0 + s, y0 + s}), cls(gen)};
    const CropWindow w = centered_crop(quad_to_bbox(lq.quad), 3200, 1800);
    o.require(w.x0 >= 0 && w.y0 >= 0 && w.x0 + w.width <= 3200 && w.y0 + w.height <= 1800, "window outside image");
    const auto local = to_local({lq}, w);
    const BBox hull = quad_to_bbox(lq.quad);
    const bool shifted = hull.center_x() < 200 || hull.center_x() >= 3000 || hull.center_y() < 200 ||
                         hull.center_y() >= 1600;
    shifted ? ++edge : ++interior;
    o.require(local.size() == 1 && translate(local[0].quad, w.x0, w.y0) == lq.quad &&
                  local[0].class_id == lq.class_id,
              "round trip failed");
  }
  o.detail += " interior=" + std::to_string(interior) + " edge=" + std::to_string(edge);
  return o;
}

Outcome timing() {
  Outcome o;
  SceneSpec spec;
  spec.seed = kSeed;
  spec.filename = "img.ppm";
  for (int c = 1; c <= 20; ++c)
    if (c != kConfusableClassA && c != kConfusableClassB) spec.classes.push_back(c);
  const Scene scene = generate_scene(spec);
  const auto t0 = Clock::now();
  std::vector<TileDetections> per_tile;
  for (const CropWindow& w : grid_tiles(scene.image.width(), scene.image.height())) {
    TileDetections td{w, blob_detect(scene.image.crop(w.x0, w.y0, w.width, w.height))};
    td.window.source = spec.filename;
    td.detections = drop_border_detections(td, scene.image.width(), scene.image.height());
    per_tile.push_back(std::move(td));
  }
  std::vector<PredictionRecord> preds;
  for (const Detection& d : merge_tiles(per_tile)) preds.push_back(to_prediction(spec.filename, d));
  const MetricsReport r = evaluate(scene.labels, preds);
  const double t = seconds_since(t0);
  o.require(t < 2.0, "slower than 2 s");
  o.detail += " time=" + fmt(t) + "s F1=" + fmt(r.overall.f1);
  return o;
}

}  // namespace

int main() {
  PipelineRun clear;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1", [&] { return end_to_end_clear(clear); }},
      {"A2", [&] { return failure_modes(clear); }},
      {"A3", anchor_geometry},
      {"A4", target_coding},
      {"A5", losses},
      {"A6", iou_check},
      {"A7", merge_check},
      {"A8", evaluation_protocol},
      {"A9", crop_geometry},
      {"A10", timing},
  };
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
