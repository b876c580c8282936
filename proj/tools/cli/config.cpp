#include "cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tsdet/error.hpp"
#include "tsdet/eval.hpp"

namespace tsdet::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw InvalidConfig(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw InvalidConfig(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidConfig(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split(v, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw InvalidConfig(key + ": empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_number(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

std::string num(double v) { return format_number(v); }

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

// Level names follow the stride index: P3 for the first level, and so on.
void set_levels(RunConfig& c, const std::vector<int>& strides, const std::vector<double>& sizes) {
  if (strides.size() != sizes.size()) {
    throw InvalidConfig("anchor.strides and anchor.base_sizes must have the same length");
  }
  c.anchors.levels.clear();
  for (std::size_t i = 0; i < strides.size(); ++i) {
    c.anchors.levels.push_back({"P" + std::to_string(i + 3), strides[i], sizes[i]});
  }
}

std::vector<int> strides_of(const RunConfig& c) {
  std::vector<int> v;
  for (const auto& l : c.anchors.levels) v.push_back(l.stride);
  return v;
}

std::vector<double> sizes_of(const RunConfig& c) {
  std::vector<double> v;
  for (const auto& l : c.anchors.levels) v.push_back(l.base_size);
  return v;
}

PaletteEntry& palette_entry(RunConfig& c, int class_id) {
  for (PaletteEntry& e : c.palette) {
    if (e.class_id == class_id) return e;
  }
  c.palette.push_back({class_id, {}, SignShape::Square});
  return c.palette.back();
}

std::vector<Field> build_fields() {
  std::vector<Field> f;
  const auto add = [&f](std::string key, auto get, auto set) { f.push_back({std::move(key), get, set}); };

  add("anchor.strides", [](const RunConfig& c) { return join(strides_of(c)); },
      [](RunConfig& c, const std::string& v) {
        std::vector<int> s;
        for (const auto& item : split(v, ',')) s.push_back(to_int("anchor.strides", item));
        std::vector<double> sizes = sizes_of(c);
        sizes.resize(s.size(), 0.0);
        set_levels(c, s, sizes);
      });
  add("anchor.base_sizes", [](const RunConfig& c) { return join(sizes_of(c)); },
      [](RunConfig& c, const std::string& v) {
        const std::vector<double> sizes = to_doubles("anchor.base_sizes", v);
        std::vector<int> s = strides_of(c);
        s.resize(sizes.size(), 0);
        set_levels(c, s, sizes);
      });
  add("anchor.ratios", [](const RunConfig& c) { return join(c.anchors.ratios); },
      [](RunConfig& c, const std::string& v) { c.anchors.ratios = to_doubles("anchor.ratios", v); });
  add("anchor.scales", [](const RunConfig& c) { return join(c.anchors.scales); },
      [](RunConfig& c, const std::string& v) { c.anchors.scales = to_doubles("anchor.scales", v); });
  add("assign.pos_thresh", [](const RunConfig& c) { return num(c.assign.positive); },
      [](RunConfig& c, const std::string& v) { c.assign.positive = to_double("assign.pos_thresh", v); });
  add("assign.neg_thresh", [](const RunConfig& c) { return num(c.assign.negative); },
      [](RunConfig& c, const std::string& v) { c.assign.negative = to_double("assign.neg_thresh", v); });
  add("focal.alpha", [](const RunConfig& c) { return num(c.focal.alpha); },
      [](RunConfig& c, const std::string& v) { c.focal.alpha = to_double("focal.alpha", v); });
  add("focal.gamma", [](const RunConfig& c) { return num(c.focal.gamma); },
      [](RunConfig& c, const std::string& v) { c.focal.gamma = to_double("focal.gamma", v); });
  add("smooth_l1.beta", [](const RunConfig& c) { return num(c.smooth_l1_beta); },
      [](RunConfig& c, const std::string& v) { c.smooth_l1_beta = to_double("smooth_l1.beta", v); });
  add("crop.half_extent", [](const RunConfig& c) { return std::to_string(c.crop_half_extent); },
      [](RunConfig& c, const std::string& v) { c.crop_half_extent = to_int("crop.half_extent", v); });
  add("crop.keep_fraction", [](const RunConfig& c) { return num(c.crop_keep_fraction); },
      [](RunConfig& c, const std::string& v) { c.crop_keep_fraction = to_double("crop.keep_fraction", v); });
  add("augment.scale_min", [](const RunConfig& c) { return num(c.augment_scale_min); },
      [](RunConfig& c, const std::string& v) { c.augment_scale_min = to_double("augment.scale_min", v); });
  add("augment.scale_max", [](const RunConfig& c) { return num(c.augment_scale_max); },
      [](RunConfig& c, const std::string& v) { c.augment_scale_max = to_double("augment.scale_max", v); });
  add("tile.size", [](const RunConfig& c) { return std::to_string(c.tile_size); },
      [](RunConfig& c, const std::string& v) { c.tile_size = to_int("tile.size", v); });
  add("tile.overlap", [](const RunConfig& c) { return std::to_string(c.tile_overlap); },
      [](RunConfig& c, const std::string& v) { c.tile_overlap = to_int("tile.overlap", v); });
  add("nms.iou_thresh", [](const RunConfig& c) { return num(c.nms_iou); },
      [](RunConfig& c, const std::string& v) { c.nms_iou = to_double("nms.iou_thresh", v); });
  add("eval.iou_gate", [](const RunConfig& c) { return num(c.eval_iou_gate); },
      [](RunConfig& c, const std::string& v) { c.eval_iou_gate = to_double("eval.iou_gate", v); });
  add("synth.width", [](const RunConfig& c) { return std::to_string(c.scene.width); },
      [](RunConfig& c, const std::string& v) { c.scene.width = to_int("synth.width", v); });
  add("synth.height", [](const RunConfig& c) { return std::to_string(c.scene.height); },
      [](RunConfig& c, const std::string& v) { c.scene.height = to_int("synth.height", v); });
  add("synth.signs", [](const RunConfig& c) { return std::to_string(c.scene.n_signs); },
      [](RunConfig& c, const std::string& v) { c.scene.n_signs = to_int("synth.signs", v); });
  add("synth.sign_min", [](const RunConfig& c) { return std::to_string(c.scene.sign_min); },
      [](RunConfig& c, const std::string& v) { c.scene.sign_min = to_int("synth.sign_min", v); });
  add("synth.sign_max", [](const RunConfig& c) { return std::to_string(c.scene.sign_max); },
      [](RunConfig& c, const std::string& v) { c.scene.sign_max = to_int("synth.sign_max", v); });
  add("synth.clutter", [](const RunConfig& c) { return std::to_string(c.scene.clutter); },
      [](RunConfig& c, const std::string& v) { c.scene.clutter = to_int("synth.clutter", v); });
  add("synth.color_jitter", [](const RunConfig& c) { return std::to_string(c.scene.color_jitter); },
      [](RunConfig& c, const std::string& v) { c.scene.color_jitter = to_int("synth.color_jitter", v); });
  add("synth.min_gap", [](const RunConfig& c) { return std::to_string(c.scene.min_gap); },
      [](RunConfig& c, const std::string& v) { c.scene.min_gap = to_int("synth.min_gap", v); });
  add("synth.snow_fraction", [](const RunConfig& c) { return num(c.scene.snow_fraction); },
      [](RunConfig& c, const std::string& v) { c.scene.snow_fraction = to_double("synth.snow_fraction", v); });
  add("synth.snow_flake_max_radius", [](const RunConfig& c) { return std::to_string(c.scene.snow_flake_max_radius); },
      [](RunConfig& c, const std::string& v) {
        c.scene.snow_flake_max_radius = to_int("synth.snow_flake_max_radius", v);
      });
  add("synth.dark_factor", [](const RunConfig& c) { return num(c.scene.dark_factor); },
      [](RunConfig& c, const std::string& v) { c.scene.dark_factor = to_double("synth.dark_factor", v); });
  add("detect.min_area", [](const RunConfig& c) { return std::to_string(c.detector.min_area); },
      [](RunConfig& c, const std::string& v) { c.detector.min_area = to_int("detect.min_area", v); });
  add("detect.mask_tolerance", [](const RunConfig& c) { return std::to_string(c.detector.mask_tolerance); },
      [](RunConfig& c, const std::string& v) { c.detector.mask_tolerance = to_int("detect.mask_tolerance", v); });
  add("detect.color_tolerance", [](const RunConfig& c) { return std::to_string(c.detector.color_tolerance); },
      [](RunConfig& c, const std::string& v) { c.detector.color_tolerance = to_int("detect.color_tolerance", v); });
  add("detect.drop_border", [](const RunConfig& c) { return std::string(c.detect_drop_border ? "true" : "false"); },
      [](RunConfig& c, const std::string& v) { c.detect_drop_border = to_bool("detect.drop_border", v); });

  for (int k = 1; k <= kMaxClassId; ++k) {
    const std::string key = "palette." + std::to_string(k);
    add(
        key,
        [k](const RunConfig& c) {
          for (const PaletteEntry& e : c.palette) {
            if (e.class_id == k) {
              return std::to_string(e.color.r) + "," + std::to_string(e.color.g) + "," +
                     std::to_string(e.color.b) + "," + to_string(e.shape);
            }
          }
          return std::string("none");
        },
        [k, key](RunConfig& c, const std::string& v) {
          const auto parts = split(v, ',');
          if (parts.size() != 4) throw InvalidConfig(key + ": expected r,g,b,shape");
          const auto channel = [&](const std::string& s) {
            const int x = to_int(key, s);
            if (x < 0 || x > 255) throw InvalidConfig(key + ": channel outside [0, 255]");
            return static_cast<std::uint8_t>(x);
          };
          PaletteEntry& e = palette_entry(c, k);
          e.color = {channel(parts[0]), channel(parts[1]), channel(parts[2])};
          e.shape = parse_shape(parts[3]);
        });
  }
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = build_fields();
  return f;
}

const Field& find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw InvalidConfig("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  find_field(key).set(*this, value);
}

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += f.key + "=" + f.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  anchors.validate();
  if (!(0.0 <= assign.negative && assign.negative <= assign.positive && assign.positive <= 1.0)) {
    throw InvalidConfig("need 0 <= assign.neg_thresh <= assign.pos_thresh <= 1");
  }
  focal.validate();
  if (!(smooth_l1_beta > 0.0)) throw InvalidConfig("smooth_l1.beta must be positive");
  if (crop_half_extent <= 0) throw InvalidConfig("crop.half_extent must be positive");
  if (!(crop_keep_fraction >= 0.0 && crop_keep_fraction <= 1.0)) {
    throw InvalidConfig("crop.keep_fraction must lie in [0, 1]");
  }
  if (!(augment_scale_min > 0.0 && augment_scale_min <= augment_scale_max)) {
    throw InvalidConfig("need 0 < augment.scale_min <= augment.scale_max");
  }
  if (tile_size <= 0 || tile_overlap < 0 || tile_overlap >= tile_size) {
    throw InvalidConfig("need tile.size > tile.overlap >= 0");
  }
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) throw InvalidConfig("nms.iou_thresh must lie in [0, 1]");
  if (!(eval_iou_gate >= 0.0 && eval_iou_gate <= 1.0)) throw InvalidConfig("eval.iou_gate must lie in [0, 1]");
  scene.validate();
  if (detector.min_area < 1 || detector.mask_tolerance < 0 || detector.color_tolerance < 0) {
    throw InvalidConfig("detector thresholds must be non-negative and min_area >= 1");
  }
  validate_palette(palette);
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidConfig& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  try {
    c.validate();
  } catch (const InvalidConfig& e) {
    throw ParseError(source, line_no, e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

}  // namespace tsdet::cli
