#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsdet/geom.hpp"

namespace tsdet {

inline constexpr double kDefaultIouGate = 0.9;

/// Class names in label-file order, index == class id.
extern const std::array<std::string_view, kNumClasses> kClassNames;

struct GroundTruthRecord {
  std::string filename;
  Quad quad;
  int class_id = 0;

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

struct PredictionRecord {
  std::string filename;
  Quad quad;
  int class_id = 0;
  double score = 0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

inline constexpr std::string_view kLabelHeader = "filename,x1,y1,x2,y2,x3,y3,x4,y4,type";
inline constexpr std::string_view kPredictionHeader = "filename,x1,y1,x2,y2,x3,y3,x4,y4,type,score";

/// Reads a label CSV (header row, then one quad per row). Throws IoError if
/// the file cannot be opened and ParseError (with the 1-based line number)
/// on a malformed row, a class outside [0, 20] or a degenerate quad.
std::vector<GroundTruthRecord> read_labels(const std::filesystem::path& path);
std::vector<GroundTruthRecord> parse_labels(std::istream& in, const std::string& source);

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source);

void write_labels(const std::filesystem::path& path, std::span<const GroundTruthRecord> records);
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records);

/// Shortest round-trip decimal form; integral values print without a point.
std::string format_number(double v);

struct MatchPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

/// Greedy class-agnostic matching for one image. Predictions are visited by
/// descending score (input order on ties); each takes the unmatched ground
/// truth with the highest IoU strictly above iou_gate, lowest index on ties.
MatchResult match_image(std::span<const Detection> preds, std::span<const GroundTruthRecord> gts,
                        double iou_gate = kDefaultIouGate);

struct ClassMetrics {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // False when the matching denominator was zero; the value is then reported as 0.
  bool precision_defined = false;
  bool recall_defined = false;

  void recompute();
};

/// F1 = 2PR / (P + R); 0 when P + R == 0.
double f1_score(double precision, double recall);

struct MetricsReport {
  ClassMetrics overall;
  std::array<ClassMetrics, kNumClasses> per_class{};
  // confusion[gt_class][pred_class] over gate-matched pairs.
  std::array<std::array<long, kNumClasses>, kNumClasses> confusion{};

  /// Mean F1 over classes with any TP, FP or FN.
  double macro_f1() const;
  void recompute();
};

/// TP: matched pairs whose classes agree. FP: every other prediction. FN:
/// ground truths without a correct-class match.
MetricsReport score(const MatchResult& matches, std::span<const Detection> preds,
                    std::span<const GroundTruthRecord> gts);

/// Micro roll-up: sums counts, then recomputes the rates.
MetricsReport aggregate(std::span<const MetricsReport> reports);

Detection to_detection(const PredictionRecord& p);
PredictionRecord to_prediction(const std::string& filename, const Detection& d);

/// Scores a whole prediction set against ground truth, image by image.
/// Predictions for images without ground truth count as false positives.
MetricsReport evaluate(std::span<const GroundTruthRecord> gts,
                       std::span<const PredictionRecord> preds, double iou_gate = kDefaultIouGate);

void write_report_text(std::ostream& out, const MetricsReport& report);
void write_report_csv(std::ostream& out, const MetricsReport& report);

}  // namespace tsdet
