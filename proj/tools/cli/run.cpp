#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/parallel.hpp"
#include "tsdet/error.hpp"

namespace tsdet::cli {
namespace {

void print_error(std::ostream& err, std::string_view kind, std::string_view message) {
  std::string line(message);
  std::replace(line.begin(), line.end(), '\n', ' ');
  err << "tsdet: error[" << kind << "]: " << line << '\n';
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--input", "expected WxH, e.g. 400x400");
  try {
    std::size_t used_w = 0, used_h = 0;
    const std::string ws = s.substr(0, x), hs = s.substr(x + 1);
    const int w = std::stoi(ws, &used_w);
    const int h = std::stoi(hs, &used_h);
    if (used_w != ws.size() || used_h != hs.size() || w <= 0 || h <= 0) throw std::invalid_argument(s);
    return {w, h};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--input", "expected WxH with positive integers, got '" + s + "'");
  }
}

void add_scene_options(CLI::App* sub, SceneOptions& opt) {
  sub->add_option("--seed", opt.seed, "Dataset seed");
  sub->add_option("--images", opt.images, "Number of images")->check(CLI::NonNegativeNumber);
  sub->add_option("--weather", opt.weather, "clear, dark or snow")
      ->check(CLI::IsMember({"clear", "dark", "snow"}));
  sub->add_option("--signs", opt.signs, "Signs per image (overrides synth.signs)");
  sub->add_option("--exclude-classes", opt.exclude_classes, "Classes never rendered, e.g. 18,19")
      ->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic-sign detection pipeline tooling: synthetic data, tiling, detection, merge, evaluation"};
  app.name("tsdet");
  app.require_subcommand(1);

  std::string config_path;
  int jobs = default_jobs();
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Worker threads for per-image stages")->check(CLI::PositiveNumber);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render seeded synthetic scenes and their label CSV");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  add_scene_options(synth_cmd, synth.scene);

  TilesOptions tiles;
  std::string tiles_labels;
  auto* tiles_cmd = app.add_subcommand("tiles", "Cut images into test-time tiles");
  tiles_cmd->add_option("--images", tiles.images_dir, "Directory of PPM images")->required();
  tiles_cmd->add_option("--out", tiles.out_dir, "Output directory")->required();
  tiles_cmd->add_option("--labels", tiles_labels, "Label CSV to rewrite into tile coordinates");
  tiles_cmd->add_option("--random", tiles.random, "Use N seeded random tiles per image instead of the grid")
      ->check(CLI::PositiveNumber);
  tiles_cmd->add_option("--seed", tiles.seed, "Seed for random tiling");

  CropOptions crop;
  auto* crop_cmd = app.add_subcommand("crop", "Cut target-centred training crops");
  crop_cmd->add_option("--images", crop.images_dir, "Directory of PPM images")->required();
  crop_cmd->add_option("--labels", crop.labels, "Label CSV")->required();
  crop_cmd->add_option("--out", crop.out_dir, "Output directory")->required();
  crop_cmd->add_flag("--augment", crop.augment, "Apply seeded random flip and rescale");
  crop_cmd->add_option("--seed", crop.seed, "Seed for augmentation");

  DetectOptions detect;
  auto* detect_cmd = app.add_subcommand("detect", "Run the colour-blob reference detector over tiles");
  detect_cmd->add_option("--tiles", detect.tiles_dir, "Tile directory (tiles.csv manifest or plain PPMs)")
      ->required();
  detect_cmd->add_option("--out", detect.out, "Per-tile detection CSV")->required();

  MergeOptions merge;
  auto* merge_cmd = app.add_subcommand("merge", "Map tile detections to image coordinates and apply NMS");
  merge_cmd->add_option("--detections", merge.detections, "Per-tile detection CSV(s)")->required();
  merge_cmd->add_option("--out", merge.out, "Prediction CSV")->required();

  EvalOptions eval;
  std::string eval_report, eval_csv;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth label CSV")->required();
  eval_cmd->add_option("--pred", eval.pred, "Prediction CSV")->required();
  eval_cmd->add_option("--report", eval_report, "Human-readable report (default: stdout)");
  eval_cmd->add_option("--metrics-csv", eval_csv, "Per-class metrics CSV");

  AnchorsOptions anchors;
  std::string anchors_input = "400x400";
  auto* anchors_cmd = app.add_subcommand("anchors", "Dump the anchor pyramid as CSV");
  anchors_cmd->add_option("--input", anchors_input, "Input size WxH")->capture_default_str();
  anchors_cmd->add_option("--out", anchors.out, "Output CSV")->required();

  PipelineOptions pipeline;
  std::string work_dir;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "synth -> tiles -> detect -> merge -> eval");
  add_scene_options(pipeline_cmd, pipeline.scene);
  pipeline_cmd->add_option("--work", work_dir, "Working directory for stage files (kept)");
  pipeline_cmd->add_flag("--keep", pipeline.keep, "Keep the temporary working directory");
  pipeline.scene.images = 20;

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (anchors_cmd->parsed()) std::tie(anchors.width, anchors.height) = parse_size(anchors_input);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    const RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    cfg.validate();
    {
      std::istringstream lines(cfg.to_text());
      std::string line;
      while (std::getline(lines, line)) err << "# " << line << '\n';
    }

    if (synth_cmd->parsed()) {
      run_synth(cfg, synth, jobs, err);
    } else if (tiles_cmd->parsed()) {
      if (!tiles_labels.empty()) tiles.labels = tiles_labels;
      run_tiles(cfg, tiles, jobs, err);
    } else if (crop_cmd->parsed()) {
      run_crop(cfg, crop, jobs, err);
    } else if (detect_cmd->parsed()) {
      run_detect(cfg, detect, jobs, err);
    } else if (merge_cmd->parsed()) {
      run_merge(cfg, merge, jobs, err);
    } else if (eval_cmd->parsed()) {
      if (!eval_report.empty()) eval.report = eval_report;
      if (!eval_csv.empty()) eval.metrics_csv = eval_csv;
      run_eval(cfg, eval, out, err);
    } else if (anchors_cmd->parsed()) {
      run_anchors(cfg, anchors, err);
    } else if (pipeline_cmd->parsed()) {
      if (!work_dir.empty()) pipeline.work_dir = work_dir;
      run_pipeline(cfg, pipeline, jobs, out, err);
    }
  } catch (const IoError& e) {
    print_error(err, "io", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(err, "io", e.what());
    return kExitIo;
  } catch (const ParseError& e) {
    print_error(err, "parse", e.what());
    return kExitValidation;
  } catch (const Error& e) {
    print_error(err, "validation", e.what());
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace tsdet::cli
