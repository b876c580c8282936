#include "tsdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "tsdet/error.hpp"
#include "tsdet/rng.hpp"

namespace tsdet {

std::string to_string(Weather w) {
  switch (w) {
    case Weather::Clear: return "clear";
    case Weather::Dark: return "dark";
    case Weather::Snow: return "snow";
  }
  return "clear";
}

Weather parse_weather(const std::string& s) {
  if (s == "clear") return Weather::Clear;
  if (s == "dark") return Weather::Dark;
  if (s == "snow") return Weather::Snow;
  throw InvalidConfig("unknown weather '" + s + "' (expected clear, dark or snow)");
}

std::string to_string(SignShape s) {
  switch (s) {
    case SignShape::Square: return "square";
    case SignShape::Circle: return "circle";
    case SignShape::Triangle: return "triangle";
    case SignShape::Diamond: return "diamond";
  }
  return "square";
}

SignShape parse_shape(const std::string& s) {
  if (s == "square") return SignShape::Square;
  if (s == "circle") return SignShape::Circle;
  if (s == "triangle") return SignShape::Triangle;
  if (s == "diamond") return SignShape::Diamond;
  throw InvalidConfig("unknown sign shape '" + s + "'");
}

Palette default_palette() {
  static constexpr Rgb kColors[20] = {
      {230, 40, 40},  {40, 200, 40},  {40, 60, 230},   {240, 220, 30}, {230, 40, 220},
      {30, 210, 220}, {250, 140, 20}, {140, 40, 220},  {120, 230, 30}, {10, 150, 120},
      {240, 100, 150}, {150, 20, 60}, {30, 100, 180},  {180, 200, 20}, {200, 90, 30},
      {90, 20, 160},  {10, 140, 40},  {200, 30, 90},   {200, 30, 92},  {60, 220, 150},
  };
  static constexpr SignShape kShapes[4] = {SignShape::Square, SignShape::Circle,
                                           SignShape::Triangle, SignShape::Diamond};
  Palette p;
  for (int k = 1; k <= 20; ++k) p.push_back({k, kColors[k - 1], kShapes[(k - 1) % 4]});
  return p;
}

void validate_palette(const Palette& palette) {
  if (palette.empty()) throw InvalidConfig("palette is empty");
  std::vector<bool> seen(kNumClasses, false);
  for (const PaletteEntry& e : palette) {
    if (e.class_id < 1 || e.class_id > kMaxClassId) {
      throw InvalidConfig("palette class " + std::to_string(e.class_id) + " outside [1, 20]");
    }
    if (seen[static_cast<std::size_t>(e.class_id)]) {
      throw InvalidConfig("palette class " + std::to_string(e.class_id) + " listed twice");
    }
    seen[static_cast<std::size_t>(e.class_id)] = true;
  }
}

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw InvalidConfig("scene size must be positive");
  if (n_signs < 0) throw InvalidConfig("sign count must be non-negative");
  if (sign_min < 4 || sign_max < sign_min) throw InvalidConfig("need 4 <= sign_min <= sign_max");
  if (n_signs > 0 && (sign_max > width || sign_max > height)) {
    throw InvalidConfig("largest sign does not fit in the scene");
  }
  if (clutter < 0 || color_jitter < 0 || min_gap < 0) {
    throw InvalidConfig("clutter, jitter and gap must be non-negative");
  }
  if (!(snow_fraction >= 0.0 && snow_fraction <= 1.0)) throw InvalidConfig("snow fraction must lie in [0, 1]");
  if (snow_flake_max_radius < 0) throw InvalidConfig("snow flake radius must be non-negative");
  if (!(dark_factor >= 0.0 && dark_factor <= 1.0)) throw InvalidConfig("dark factor must lie in [0, 1]");
  if (placement_retries <= 0) throw InvalidConfig("placement retries must be positive");
  for (int c : classes) {
    if (c < 1 || c > kMaxClassId) throw InvalidConfig("scene class " + std::to_string(c) + " outside [1, 20]");
  }
}

Span shape_span(SignShape shape, int size, int row) {
  if (shape == SignShape::Square) return {0, size};
  const double half_size = 0.5 * size;
  const double dy = (row + 0.5 - half_size) / half_size;
  double half = 0;
  switch (shape) {
    case SignShape::Circle: half = half_size * std::sqrt(std::max(0.0, 1.0 - dy * dy)); break;
    case SignShape::Triangle: half = half_size * (row + 1) / size; break;
    case SignShape::Diamond: half = half_size * (1.0 - std::abs(dy)); break;
    case SignShape::Square: break;
  }
  half = std::max(half, 1.0);
  const int begin = std::max(0, static_cast<int>(std::floor(half_size - half)));
  const int end = std::min(size, static_cast<int>(std::ceil(half_size + half)));
  return {begin, end};
}

namespace {

std::uint8_t clamp_channel(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

void render_background(ImageBuffer& img, std::uint64_t seed) {
  Rng rng(seed);
  const int horizon = img.height() * 2 / 5;
  for (int y = 0; y < img.height(); ++y) {
    const bool sky = y < horizon;
    // Slight vertical gradient in both regions.
    const int shade = sky ? 170 - 20 * y / std::max(1, horizon)
                          : 92 + 24 * (y - horizon) / std::max(1, img.height() - horizon);
    const Rgb base = sky ? Rgb{clamp_channel(shade), clamp_channel(shade + 6), clamp_channel(shade + 16)}
                         : Rgb{clamp_channel(shade), clamp_channel(shade), clamp_channel(shade + 4)};
    for (int x = 0; x < img.width(); ++x) {
      const std::uint64_t bits = rng.next();
      const auto noise = [&](int k) { return static_cast<int>((bits >> (16 * k)) % 13) - 6; };
      img.set(x, y, {clamp_channel(base.r + noise(0)), clamp_channel(base.g + noise(1)),
                     clamp_channel(base.b + noise(2))});
    }
  }
}

void fill_shape(ImageBuffer& img, SignShape shape, int x0, int y0, int size, Rgb color) {
  for (int r = 0; r < size; ++r) {
    const int y = y0 + r;
    if (y < 0 || y >= img.height()) continue;
    const Span s = shape_span(shape, size, r);
    for (int c = s.begin; c < s.end; ++c) {
      const int x = x0 + c;
      if (x >= 0 && x < img.width()) img.set(x, y, color);
    }
  }
}

void render_clutter(ImageBuffer& img, int count, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int size = static_cast<int>(rng.uniform_int(20, 160));
    const int x0 = static_cast<int>(rng.uniform_int(0, std::max(0, img.width() - size)));
    const int y0 = static_cast<int>(rng.uniform_int(0, std::max(0, img.height() - size)));
    const int grey = static_cast<int>(rng.uniform_int(50, 210));
    const Rgb color{clamp_channel(grey + static_cast<int>(rng.uniform_int(-8, 8))),
                    clamp_channel(grey + static_cast<int>(rng.uniform_int(-8, 8))),
                    clamp_channel(grey + static_cast<int>(rng.uniform_int(-8, 8)))};
    const SignShape shape = rng.bernoulli(0.5) ? SignShape::Square : SignShape::Circle;
    fill_shape(img, shape, x0, y0, size, color);
  }
}

void apply_snow(ImageBuffer& img, double fraction, int max_radius, std::uint64_t seed) {
  const std::size_t total = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height());
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<bool> white(total, false);
  std::size_t covered = 0;
  Rng rng(seed);
  const Rgb snow{255, 255, 255};
  while (covered < target) {
    const int cx = static_cast<int>(rng.uniform_int(0, img.width() - 1));
    const int cy = static_cast<int>(rng.uniform_int(0, img.height() - 1));
    const int r = static_cast<int>(rng.uniform_int(0, max_radius));
    for (int dy = -r; dy <= r && covered < target; ++dy) {
      for (int dx = -r; dx <= r && covered < target; ++dx) {
        if (dx * dx + dy * dy > r * r) continue;
        const int x = cx + dx;
        const int y = cy + dy;
        if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) +
                              static_cast<std::size_t>(x);
        if (white[i]) continue;
        white[i] = true;
        ++covered;
        img.set(x, y, snow);
      }
    }
  }
}

void apply_dark(ImageBuffer& img, double factor) {
  for (std::uint8_t& v : img.bytes()) {
    v = static_cast<std::uint8_t>(std::lround(v * factor));
  }
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, const Palette& palette) {
  spec.validate();
  validate_palette(palette);

  std::vector<const PaletteEntry*> candidates;
  for (const PaletteEntry& e : palette) {
    if (spec.classes.empty() ||
        std::find(spec.classes.begin(), spec.classes.end(), e.class_id) != spec.classes.end()) {
      candidates.push_back(&e);
    }
  }
  if (spec.n_signs > 0 && candidates.empty()) {
    throw InvalidConfig("no palette entry matches the requested scene classes");
  }

  Scene scene;
  scene.image = ImageBuffer(spec.width, spec.height);
  render_background(scene.image, mix_seed(spec.seed, 1));
  render_clutter(scene.image, spec.clutter, mix_seed(spec.seed, 2));

  Rng rng(mix_seed(spec.seed, 3));
  std::vector<BBox> placed;
  for (int i = 0; i < spec.n_signs; ++i) {
    const int size = static_cast<int>(rng.uniform_int(spec.sign_min, spec.sign_max));
    bool ok = false;
    BBox box;
    for (int attempt = 0; attempt < spec.placement_retries && !ok; ++attempt) {
      const auto x = static_cast<double>(rng.uniform_int(0, spec.width - size));
      const auto y = static_cast<double>(rng.uniform_int(0, spec.height - size));
      box = BBox{x, y, x + size, y + size};
      const BBox grown = BBox{box.xmin - spec.min_gap, box.ymin - spec.min_gap,
                              box.xmax + spec.min_gap, box.ymax + spec.min_gap};
      ok = std::none_of(placed.begin(), placed.end(),
                        [&](const BBox& other) { return intersection_area(grown, other) > 0.0; });
    }
    if (!ok) {
      throw PlacementFailure("could not place sign " + std::to_string(i + 1) + " of " +
                             std::to_string(spec.n_signs) + " without overlap");
    }
    placed.push_back(box);

    const PaletteEntry& entry =
        *candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    const auto jitter = [&] { return static_cast<int>(rng.uniform_int(-spec.color_jitter, spec.color_jitter)); };
    const Rgb color{clamp_channel(entry.color.r + jitter()), clamp_channel(entry.color.g + jitter()),
                    clamp_channel(entry.color.b + jitter())};
    fill_shape(scene.image, entry.shape, static_cast<int>(box.xmin), static_cast<int>(box.ymin), size, color);
    scene.labels.push_back({spec.filename, bbox_to_quad(box), entry.class_id});
  }

  switch (spec.weather) {
    case Weather::Clear: break;
    case Weather::Snow:
      apply_snow(scene.image, spec.snow_fraction, spec.snow_flake_max_radius, mix_seed(spec.seed, 4));
      break;
    case Weather::Dark: apply_dark(scene.image, spec.dark_factor); break;
  }
  return scene;
}

namespace {

int linf(Rgb a, Rgb b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
}

int channel_range(Rgb c) { return std::max({c.r, c.g, c.b}) - std::min({c.r, c.g, c.b}); }

}  // namespace

std::vector<Detection> blob_detect(const ImageBuffer& img, const Palette& palette,
                                   const DetectorParams& params) {
  std::vector<Detection> out;
  if (img.empty() || palette.empty()) return out;
  const int w = img.width();
  const int h = img.height();
  const auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };

  // A pixel within mask_tolerance (L-inf) of colour c has a channel range of
  // at least range(c) - 2*tol, which rejects most background pixels cheaply.
  int min_palette_range = 255;
  for (const PaletteEntry& e : palette) min_palette_range = std::min(min_palette_range, channel_range(e.color));
  const int reject_below = min_palette_range - 2 * params.mask_tolerance;

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = img.at(x, y);
      if (channel_range(c) < reject_below) continue;
      for (const PaletteEntry& e : palette) {
        if (linf(c, e.color) <= params.mask_tolerance) {
          mask[idx(x, y)] = 1;
          break;
        }
      }
    }
  }

  std::vector<int> label(mask.size(), -1);
  std::vector<std::pair<int, int>> stack;
  std::vector<std::pair<int, int>> members;
  int next_label = 0;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!mask[idx(sx, sy)] || label[idx(sx, sy)] >= 0) continue;

      const int id = next_label++;
      members.clear();
      stack.assign(1, {sx, sy});
      label[idx(sx, sy)] = id;
      int xmin = sx, xmax = sx, ymin = sy, ymax = sy;
      long sum_r = 0, sum_g = 0, sum_b = 0;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        members.emplace_back(x, y);
        const Rgb c = img.at(x, y);
        sum_r += c.r;
        sum_g += c.g;
        sum_b += c.b;
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + kDx[k];
          const int ny = y + kDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = idx(nx, ny);
          if (!mask[ni] || label[ni] >= 0) continue;
          label[ni] = id;
          stack.emplace_back(nx, ny);
        }
      }

      const auto area = static_cast<long>(members.size());
      if (area < params.min_area) continue;

      const double n = static_cast<double>(area);
      const double mr = sum_r / n, mg = sum_g / n, mb = sum_b / n;
      const PaletteEntry* best = nullptr;
      double best_d = 0;
      for (const PaletteEntry& e : palette) {
        const double d = std::max({std::abs(mr - e.color.r), std::abs(mg - e.color.g), std::abs(mb - e.color.b)});
        if (best == nullptr || d < best_d || (d == best_d && e.class_id < best->class_id)) {
          best = &e;
          best_d = d;
        }
      }

      long tight = 0;
      for (const auto& [x, y] : members) {
        if (linf(img.at(x, y), best->color) <= params.color_tolerance) ++tight;
      }

      // Pixels of the bounding box reachable from its border without
      // crossing the component are exterior; everything else is the filled
      // footprint (component plus enclosed holes).
      const int bw = xmax - xmin + 1;
      const int bh = ymax - ymin + 1;
      std::vector<std::uint8_t> exterior(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh), 0);
      const auto local = [bw](int x, int y) {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(bw) + static_cast<std::size_t>(x);
      };
      const auto in_component = [&](int lx, int ly) { return label[idx(xmin + lx, ymin + ly)] == id; };
      stack.clear();
      const auto seed_exterior = [&](int lx, int ly) {
        if (!in_component(lx, ly) && !exterior[local(lx, ly)]) {
          exterior[local(lx, ly)] = 1;
          stack.emplace_back(lx, ly);
        }
      };
      for (int lx = 0; lx < bw; ++lx) {
        seed_exterior(lx, 0);
        seed_exterior(lx, bh - 1);
      }
      for (int ly = 0; ly < bh; ++ly) {
        seed_exterior(0, ly);
        seed_exterior(bw - 1, ly);
      }
      long exterior_count = 0;
      while (!stack.empty()) {
        const auto [lx, ly] = stack.back();
        stack.pop_back();
        ++exterior_count;
        if (lx + 1 < bw) seed_exterior(lx + 1, ly);
        if (lx > 0) seed_exterior(lx - 1, ly);
        if (ly + 1 < bh) seed_exterior(lx, ly + 1);
        if (ly > 0) seed_exterior(lx, ly - 1);
      }
      const long filled = static_cast<long>(bw) * bh - exterior_count;

      Detection d;
      d.bbox = BBox{static_cast<double>(xmin), static_cast<double>(ymin), static_cast<double>(xmax + 1),
                    static_cast<double>(ymax + 1)};
      d.class_id = best->class_id;
      d.score = std::clamp(static_cast<double>(tight) / static_cast<double>(filled), 0.0, 1.0);
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace tsdet
