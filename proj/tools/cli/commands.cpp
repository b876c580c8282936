#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "cli/parallel.hpp"
#include "tsdet/anchors.hpp"
#include "tsdet/crop.hpp"
#include "tsdet/error.hpp"
#include "tsdet/image.hpp"
#include "tsdet/merge.hpp"
#include "tsdet/rng.hpp"
#include "tsdet/synth.hpp"

namespace tsdet::cli {
namespace {

std::vector<fs::path> list_ppm(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

// Minimal reader for the CLI's own CSV files: header check plus field split.
std::vector<std::vector<std::string>> read_table(const fs::path& path, std::string_view header,
                                                 std::size_t n_fields) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) throw ParseError(path.string(), line_no, "expected header '" + std::string(header) + "'");
      seen_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != n_fields) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
    }
    fields.push_back(std::to_string(line_no));  // carried for error messages
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <typename T>
T field_as(const std::vector<std::string>& row, std::size_t i, const fs::path& path) {
  const std::string& s = row[i];
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(path.string(), std::stoul(row.back()), "bad numeric field '" + s + "'");
  }
  return v;
}

SceneSpec scene_spec(const RunConfig& cfg, const SceneOptions& opt, int index) {
  SceneSpec spec = cfg.scene;
  spec.seed = mix_seed(opt.seed, static_cast<std::uint64_t>(index));
  spec.weather = parse_weather(opt.weather);
  if (opt.signs) spec.n_signs = *opt.signs;
  spec.classes.clear();
  for (const PaletteEntry& e : cfg.palette) {
    if (std::find(opt.exclude_classes.begin(), opt.exclude_classes.end(), e.class_id) == opt.exclude_classes.end()) {
      spec.classes.push_back(e.class_id);
    }
  }
  char name[32];
  std::snprintf(name, sizeof name, "img_%04d.ppm", index);
  spec.filename = name;
  return spec;
}

std::vector<LabeledQuad> labels_for(const std::vector<GroundTruthRecord>& gts, const std::string& filename) {
  std::vector<LabeledQuad> out;
  for (const auto& g : gts) {
    if (g.filename == filename) out.push_back({g.quad, g.class_id});
  }
  return out;
}

std::string indexed_name(const fs::path& image, const char* tag, std::size_t i) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_%s%04zu.ppm", tag, i);
  return image.stem().string() + suffix;
}

}  // namespace

void run_synth(const RunConfig& cfg, const SynthOptions& opt, int jobs, std::ostream& log) {
  if (opt.scene.images < 0) throw InvalidConfig("--images must be non-negative");
  ensure_dir(opt.out_dir);
  std::vector<std::vector<GroundTruthRecord>> labels(static_cast<std::size_t>(opt.scene.images));
  parallel_for(labels.size(), jobs, [&](std::size_t i) {
    const SceneSpec spec = scene_spec(cfg, opt.scene, static_cast<int>(i));
    Scene scene = generate_scene(spec, cfg.palette);
    write_ppm(opt.out_dir / spec.filename, scene.image);
    labels[i] = std::move(scene.labels);
  });
  std::vector<GroundTruthRecord> all;
  for (auto& l : labels) all.insert(all.end(), l.begin(), l.end());
  write_labels(opt.out_dir / "labels.csv", all);
  log << "[synth] " << labels.size() << " images, " << all.size() << " signs -> " << opt.out_dir.string() << '\n';
}

void run_tiles(const RunConfig& cfg, const TilesOptions& opt, int jobs, std::ostream& log) {
  const std::vector<fs::path> images = list_ppm(opt.images_dir);
  std::vector<GroundTruthRecord> gts;
  if (opt.labels) gts = read_labels(*opt.labels);
  ensure_dir(opt.out_dir);

  struct Result {
    std::string manifest;
    std::vector<GroundTruthRecord> labels;
    std::size_t tiles = 0;
  };
  std::vector<Result> results(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const ImageBuffer img = read_ppm(images[i]);
    const std::string filename = images[i].filename().string();
    const std::vector<CropWindow> windows =
        opt.random > 0 ? random_tiles(img.width(), img.height(), opt.random, mix_seed(opt.seed, i), cfg.tile_size)
                       : grid_tiles(img.width(), img.height(), cfg.tile_size, cfg.tile_overlap);
    const std::vector<LabeledQuad> global = labels_for(gts, filename);
    std::ostringstream manifest;
    for (std::size_t t = 0; t < windows.size(); ++t) {
      CropWindow w = windows[t];
      w.source = filename;
      const std::string tile_file = indexed_name(images[i], "t", t);
      write_ppm(opt.out_dir / tile_file, img.crop(w.x0, w.y0, w.width, w.height));
      manifest << tile_file << ',' << filename << ',' << w.x0 << ',' << w.y0 << ',' << w.width << ','
               << w.height << ',' << img.width() << ',' << img.height() << '\n';
      for (const LabeledQuad& l : to_local(global, w, cfg.crop_keep_fraction)) {
        results[i].labels.push_back({tile_file, l.quad, l.class_id});
      }
    }
    results[i].manifest = manifest.str();
    results[i].tiles = windows.size();
  });

  const fs::path manifest_path = opt.out_dir / "tiles.csv";
  auto manifest = open_out(manifest_path);
  manifest << kTileManifestHeader << '\n';
  std::vector<GroundTruthRecord> local;
  std::size_t total = 0;
  for (const Result& r : results) {
    manifest << r.manifest;
    local.insert(local.end(), r.labels.begin(), r.labels.end());
    total += r.tiles;
  }
  finish(manifest, manifest_path);
  if (opt.labels) write_labels(opt.out_dir / "labels.csv", local);
  log << "[tiles] " << images.size() << " images -> " << total << " tiles ("
      << (opt.random > 0 ? "random" : "grid") << ") in " << opt.out_dir.string() << '\n';
}

void run_crop(const RunConfig& cfg, const CropOptions& opt, int jobs, std::ostream& log) {
  const std::vector<GroundTruthRecord> gts = read_labels(opt.labels);
  ensure_dir(opt.out_dir);

  // Images in first-appearance order of the label file.
  std::vector<std::string> names;
  for (const auto& g : gts) {
    if (std::find(names.begin(), names.end(), g.filename) == names.end()) names.push_back(g.filename);
  }

  struct Result {
    std::string manifest;
    std::vector<GroundTruthRecord> labels;
  };
  std::vector<Result> results(names.size());
  parallel_for(names.size(), jobs, [&](std::size_t i) {
    const fs::path image_path = opt.images_dir / names[i];
    const ImageBuffer img = read_ppm(image_path);
    const std::vector<LabeledQuad> global = labels_for(gts, names[i]);
    std::ostringstream manifest;
    for (std::size_t k = 0; k < global.size(); ++k) {
      CropWindow w = centered_crop(quad_to_bbox(global[k].quad), img.width(), img.height(), cfg.crop_half_extent);
      w.source = names[i];
      LabeledCrop crop = extract_crop(img, global, w, cfg.crop_keep_fraction);
      bool flipped = false;
      double factor = 1.0;
      if (opt.augment) {
        Rng rng(mix_seed(opt.seed, (static_cast<std::uint64_t>(i) << 32) | k));
        flipped = rng.bernoulli(0.5);
        factor = rng.uniform(cfg.augment_scale_min, cfg.augment_scale_max);
        if (flipped) crop = hflip(crop);
        crop = rescale(crop, factor);
      }
      const std::string crop_file = indexed_name(image_path, "c", k);
      write_ppm(opt.out_dir / crop_file, crop.image);
      manifest << crop_file << ',' << names[i] << ',' << w.x0 << ',' << w.y0 << ',' << crop.image.width() << ','
               << crop.image.height() << ',' << (flipped ? 1 : 0) << ',' << format_number(factor) << '\n';
      for (const LabeledQuad& l : crop.labels) results[i].labels.push_back({crop_file, l.quad, l.class_id});
    }
    results[i].manifest = manifest.str();
  });

  const fs::path manifest_path = opt.out_dir / "crops.csv";
  auto manifest = open_out(manifest_path);
  manifest << kCropManifestHeader << '\n';
  std::vector<GroundTruthRecord> local;
  for (const Result& r : results) {
    manifest << r.manifest;
    local.insert(local.end(), r.labels.begin(), r.labels.end());
  }
  finish(manifest, manifest_path);
  write_labels(opt.out_dir / "labels.csv", local);
  log << "[crop] " << gts.size() << " targets -> " << opt.out_dir.string() << '\n';
}

void run_detect(const RunConfig& cfg, const DetectOptions& opt, int jobs, std::ostream& log) {
  struct TileJob {
    fs::path file;
    std::string source;
    int x0 = 0, y0 = 0, image_w = 0, image_h = 0;
  };
  std::vector<TileJob> tiles;
  const fs::path manifest = opt.tiles_dir / "tiles.csv";
  if (fs::exists(manifest)) {
    for (const auto& row : read_table(manifest, kTileManifestHeader, 8)) {
      tiles.push_back({opt.tiles_dir / row[0], row[1], field_as<int>(row, 2, manifest),
                       field_as<int>(row, 3, manifest), field_as<int>(row, 6, manifest),
                       field_as<int>(row, 7, manifest)});
    }
  } else {
    // No manifest: every image is its own single tile at the origin.
    for (const fs::path& p : list_ppm(opt.tiles_dir)) tiles.push_back({p, p.filename().string(), 0, 0, 0, 0});
  }

  std::vector<std::string> rows(tiles.size());
  parallel_for(tiles.size(), jobs, [&](std::size_t i) {
    const TileJob& job = tiles[i];
    const ImageBuffer img = read_ppm(job.file);
    TileDetections td;
    td.window = CropWindow{job.x0, job.y0, img.width(), img.height(), job.source};
    td.detections = blob_detect(img, cfg.palette, cfg.detector);
    if (cfg.detect_drop_border && job.image_w > 0) {
      td.detections = drop_border_detections(td, job.image_w, job.image_h);
    }
    std::ostringstream s;
    for (const Detection& d : td.detections) {
      s << job.source << ',' << job.x0 << ',' << job.y0 << ',' << format_number(d.bbox.xmin) << ','
        << format_number(d.bbox.ymin) << ',' << format_number(d.bbox.xmax) << ',' << format_number(d.bbox.ymax)
        << ',' << d.class_id << ',' << format_number(d.score) << '\n';
    }
    rows[i] = s.str();
  });

  auto out = open_out(opt.out);
  out << kDetectionHeader << '\n';
  for (const std::string& r : rows) out << r;
  finish(out, opt.out);
  log << "[detect] " << tiles.size() << " tiles -> " << opt.out.string() << '\n';
}

void run_merge(const RunConfig& cfg, const MergeOptions& opt, int jobs, std::ostream& log) {
  // filename -> (tile origin -> detections)
  std::map<std::string, std::map<std::pair<int, int>, std::vector<Detection>>> images;
  std::size_t n_in = 0;
  for (const fs::path& path : opt.detections) {
    for (const auto& row : read_table(path, kDetectionHeader, 9)) {
      Detection d;
      const double xmin = field_as<double>(row, 3, path), ymin = field_as<double>(row, 4, path);
      const double xmax = field_as<double>(row, 5, path), ymax = field_as<double>(row, 6, path);
      d.bbox = BBox{xmin, ymin, xmax, ymax};
      d.class_id = field_as<int>(row, 7, path);
      d.score = field_as<double>(row, 8, path);
      const std::size_t line = std::stoul(row.back());
      if (!is_valid(d.bbox)) throw ParseError(path.string(), line, "degenerate detection box");
      if (!is_valid_class(d.class_id)) throw ParseError(path.string(), line, "class outside [0, 20]");
      if (!(d.score >= 0.0 && d.score <= 1.0)) throw ParseError(path.string(), line, "score outside [0, 1]");
      images[row[0]][{field_as<int>(row, 1, path), field_as<int>(row, 2, path)}].push_back(d);
      ++n_in;
    }
  }

  std::vector<const std::string*> names;
  for (const auto& [name, tiles] : images) names.push_back(&name);
  std::vector<std::vector<PredictionRecord>> merged(names.size());
  parallel_for(names.size(), jobs, [&](std::size_t i) {
    std::vector<TileDetections> tds;
    for (const auto& [origin, dets] : images.at(*names[i])) {
      TileDetections td;
      td.window = CropWindow{origin.first, origin.second, cfg.tile_size, cfg.tile_size, *names[i]};
      td.detections = dets;
      tds.push_back(std::move(td));
    }
    for (const Detection& d : merge_tiles(tds, cfg.nms_iou)) merged[i].push_back(to_prediction(*names[i], d));
  });

  std::vector<PredictionRecord> all;
  for (auto& m : merged) all.insert(all.end(), m.begin(), m.end());
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  write_predictions(opt.out, all);
  log << "[merge] " << n_in << " tile detections -> " << all.size() << " predictions in " << opt.out.string()
      << '\n';
}

MetricsReport run_eval(const RunConfig& cfg, const EvalOptions& opt, std::ostream& out, std::ostream& log) {
  const std::vector<GroundTruthRecord> gts = read_labels(opt.gt);
  const std::vector<PredictionRecord> preds = read_predictions(opt.pred);
  const MetricsReport report = evaluate(gts, preds, cfg.eval_iou_gate);
  if (opt.report) {
    auto f = open_out(*opt.report);
    write_report_text(f, report);
    finish(f, *opt.report);
  } else {
    write_report_text(out, report);
  }
  if (opt.metrics_csv) {
    auto f = open_out(*opt.metrics_csv);
    write_report_csv(f, report);
    finish(f, *opt.metrics_csv);
  }
  log << "[eval] " << gts.size() << " ground truths, " << preds.size() << " predictions, F1 "
      << format_number(report.overall.f1) << '\n';
  return report;
}

void run_anchors(const RunConfig& cfg, const AnchorsOptions& opt, std::ostream& log) {
  const std::vector<Anchor> anchors = generate_pyramid(cfg.anchors, opt.width, opt.height);
  auto out = open_out(opt.out);
  out << kAnchorHeader << '\n';
  for (const Anchor& a : anchors) {
    out << cfg.anchors.levels[static_cast<std::size_t>(a.level)].name << ',' << a.row << ',' << a.col << ','
        << format_number(cfg.anchors.ratios[static_cast<std::size_t>(a.ratio_index)]) << ','
        << format_number(cfg.anchors.scales[static_cast<std::size_t>(a.scale_index)]) << ','
        << format_number(a.bbox.xmin) << ',' << format_number(a.bbox.ymin) << ',' << format_number(a.bbox.xmax)
        << ',' << format_number(a.bbox.ymax) << '\n';
  }
  finish(out, opt.out);
  log << "[anchors] " << anchors.size() << " anchors for " << opt.width << "x" << opt.height << " -> "
      << opt.out.string() << '\n';
}

MetricsReport run_pipeline(const RunConfig& cfg, const PipelineOptions& opt, int jobs, std::ostream& out,
                           std::ostream& log) {
  fs::path work;
  if (opt.work_dir) {
    work = *opt.work_dir;
  } else {
    work = fs::temp_directory_path() /
           ("tsdet-pipeline-" + std::to_string(opt.scene.seed) + "-" + std::to_string(::getpid()));
  }
  ensure_dir(work);
  {
    const fs::path cfg_path = work / "config.txt";
    auto f = open_out(cfg_path);
    f << cfg.to_text();
    finish(f, cfg_path);
  }

  run_synth(cfg, SynthOptions{work / "images", opt.scene}, jobs, log);
  run_tiles(cfg, TilesOptions{work / "images", work / "tiles", std::nullopt, 0, 0}, jobs, log);
  run_detect(cfg, DetectOptions{work / "tiles", work / "detections.csv"}, jobs, log);
  run_merge(cfg, MergeOptions{{work / "detections.csv"}, work / "predictions.csv"}, jobs, log);
  const MetricsReport report = run_eval(
      cfg, EvalOptions{work / "images" / "labels.csv", work / "predictions.csv", work / "report.txt", work / "metrics.csv"},
      out, log);
  write_report_text(out, report);

  if (!opt.work_dir && !opt.keep) {
    std::error_code ec;
    fs::remove_all(work, ec);
  } else {
    log << "[pipeline] artifacts kept in " << work.string() << '\n';
  }
  return report;
}

}  // namespace tsdet::cli
