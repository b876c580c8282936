#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tsdet/anchors.hpp"
#include "tsdet/losses.hpp"
#include "tsdet/synth.hpp"
#include "tsdet/target_coding.hpp"

namespace tsdet::cli {

/// Every tunable of the pipeline. Loaded from a plain-text key=value file;
/// keys not present keep their defaults and unknown keys are rejected.
struct RunConfig {
  AnchorConfig anchors = AnchorConfig::defaults();
  AssignmentThresholds assign;
  FocalParams focal;
  double smooth_l1_beta = kDefaultSmoothL1Beta;

  int crop_half_extent = 200;
  double crop_keep_fraction = 0.5;
  double augment_scale_min = 0.8;
  double augment_scale_max = 1.2;

  int tile_size = 400;
  int tile_overlap = 100;

  double nms_iou = 0.5;
  double eval_iou_gate = 0.9;

  SceneSpec scene;  // seed, filename, weather, classes are set per run
  DetectorParams detector;
  bool detect_drop_border = true;
  Palette palette = default_palette();

  /// Parses key=value lines; '#' starts a comment. Throws InvalidConfig
  /// (via ParseError with the line number) on unknown keys or bad values.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& text, const std::string& source);

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Effective configuration, one key=value per line, in a fixed order.
  std::string to_text() const;

  void validate() const;

  static std::vector<std::string> keys();
};

}  // namespace tsdet::cli
