#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "tsdet/eval.hpp"

namespace tsdet::cli {

namespace fs = std::filesystem;

inline constexpr std::string_view kDetectionHeader =
    "filename,tile_x0,tile_y0,xmin,ymin,xmax,ymax,class,score";
inline constexpr std::string_view kTileManifestHeader =
    "tile_file,filename,tile_x0,tile_y0,width,height,image_width,image_height";
inline constexpr std::string_view kCropManifestHeader =
    "crop_file,filename,x0,y0,width,height,flipped,scale";
inline constexpr std::string_view kAnchorHeader = "level,row,col,ratio,scale,xmin,ymin,xmax,ymax";

struct SceneOptions {
  std::uint64_t seed = 0;
  int images = 1;
  std::string weather = "clear";
  std::optional<int> signs;
  std::vector<int> exclude_classes;
};

struct SynthOptions {
  fs::path out_dir;
  SceneOptions scene;
};

struct TilesOptions {
  fs::path images_dir;
  fs::path out_dir;
  std::optional<fs::path> labels;
  int random = 0;  // > 0 switches from grid to seeded random tiling
  std::uint64_t seed = 0;
};

struct CropOptions {
  fs::path images_dir;
  fs::path labels;
  fs::path out_dir;
  bool augment = false;
  std::uint64_t seed = 0;
};

struct DetectOptions {
  fs::path tiles_dir;
  fs::path out;
};

struct MergeOptions {
  std::vector<fs::path> detections;
  fs::path out;
};

struct EvalOptions {
  fs::path gt;
  fs::path pred;
  std::optional<fs::path> report;
  std::optional<fs::path> metrics_csv;
};

struct AnchorsOptions {
  int width = 400;
  int height = 400;
  fs::path out;
};

struct PipelineOptions {
  SceneOptions scene;
  std::optional<fs::path> work_dir;
  bool keep = false;
};

// Each stage reads and writes files only; `log` receives progress lines.
void run_synth(const RunConfig& cfg, const SynthOptions& opt, int jobs, std::ostream& log);
void run_tiles(const RunConfig& cfg, const TilesOptions& opt, int jobs, std::ostream& log);
void run_crop(const RunConfig& cfg, const CropOptions& opt, int jobs, std::ostream& log);
void run_detect(const RunConfig& cfg, const DetectOptions& opt, int jobs, std::ostream& log);
void run_merge(const RunConfig& cfg, const MergeOptions& opt, int jobs, std::ostream& log);
MetricsReport run_eval(const RunConfig& cfg, const EvalOptions& opt, std::ostream& out, std::ostream& log);
void run_anchors(const RunConfig& cfg, const AnchorsOptions& opt, std::ostream& log);
MetricsReport run_pipeline(const RunConfig& cfg, const PipelineOptions& opt, int jobs,
                           std::ostream& out, std::ostream& log);

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitValidation = 3;

/// Entry point shared by the executable and the tests. args excludes argv[0].
/// Errors are reported on `err` as a single "tsdet: error[<kind>]: <message>" line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsdet::cli
