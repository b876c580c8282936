#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsdet/eval.hpp"
#include "tsdet/geom.hpp"
#include "tsdet/image.hpp"

namespace tsdet {

enum class Weather { Clear, Dark, Snow };
enum class SignShape { Square, Circle, Triangle, Diamond };

std::string to_string(Weather w);
Weather parse_weather(const std::string& s);  // throws InvalidConfig
std::string to_string(SignShape s);
SignShape parse_shape(const std::string& s);  // throws InvalidConfig

struct PaletteEntry {
  int class_id = 0;
  Rgb color;
  SignShape shape = SignShape::Square;

  friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

using Palette = std::vector<PaletteEntry>;

/// One saturated colour per class 1..20. Classes 18 and 19 (the two speed
/// limits) differ by 2 in the blue channel only, which is inside the
/// per-sign colour jitter, so the reference detector confuses them.
Palette default_palette();

/// Throws InvalidConfig on an empty palette, a class id outside [1, 20] or
/// a duplicated class id.
void validate_palette(const Palette& palette);

inline constexpr int kConfusableClassA = 18;
inline constexpr int kConfusableClassB = 19;

struct SceneSpec {
  std::uint64_t seed = 0;
  std::string filename = "scene.ppm";
  int width = 3200;
  int height = 1800;
  int n_signs = 3;
  int sign_min = 30;
  int sign_max = 80;
  Weather weather = Weather::Clear;
  int clutter = 20;
  std::vector<int> classes;  // candidate sign classes; empty = every palette class
  int color_jitter = 4;      // per-sign, per-channel offset in [-j, j]
  int min_gap = 4;           // minimum pixel gap between sign hulls
  double snow_fraction = 0.02;
  int snow_flake_max_radius = 4;
  double dark_factor = 0.3;
  int placement_retries = 2000;

  void validate() const;
};

struct Scene {
  ImageBuffer image;
  std::vector<GroundTruthRecord> labels;
};

/// Renders a deterministic scene: sky/road background with noise, grey
/// distractor shapes, then flat-coloured signs whose labels are the exact
/// pixel bounds. `snow` overwrites snow_fraction of all pixels with white
/// flakes; `dark` scales every channel by dark_factor. Throws
/// PlacementFailure if the signs cannot be placed without overlap.
Scene generate_scene(const SceneSpec& spec, const Palette& palette = default_palette());

/// Pixel columns [begin, end) covered by row `row` of a sign of the given
/// shape and size. Every row is non-empty and at least one row spans the
/// full width, so the rendered bounds equal the sign box.
struct Span {
  int begin = 0;
  int end = 0;
};
Span shape_span(SignShape shape, int size, int row);

struct DetectorParams {
  int min_area = 50;         // smallest component kept, in pixels
  int mask_tolerance = 40;   // L-inf distance to any palette colour for the mask
  int color_tolerance = 12;  // L-inf distance to the class colour for the score
};

/// Colour-threshold reference detector: 4-connected components of
/// palette-coloured pixels, class from the palette colour nearest the
/// component mean, score = (pixels within color_tolerance of the class
/// colour) / (component area including enclosed holes).
std::vector<Detection> blob_detect(const ImageBuffer& img, const Palette& palette = default_palette(),
                                   const DetectorParams& params = {});

}  // namespace tsdet
