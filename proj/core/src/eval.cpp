#include "tsdet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tsdet/error.hpp"

namespace tsdet {

const std::array<std::string_view, kNumClasses> kClassNames = {
    "others",
    "parking lot",
    "yield to parking",
    "driving on the right",
    "left or right turn",
    "bus passage",
    "driving on the left",
    "slow down",
    "driving through or right turn for motorized vehicles",
    "yield to pedestrians",
    "roundabout",
    "driving through or right turn",
    "no bus access",
    "motorcycles are prohibited",
    "prohibition of motor vehicles",
    "prohibition of non-motor vehicles",
    "no honking",
    "driving through or turning on bypass",
    "40 km/h speed limit",
    "30 km/h speed limit",
    "honking",
};

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct RowParser {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line, what); }

  double number(std::string_view field, const char* name) const {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
      fail(std::string("bad ") + name + " value '" + std::string(field) + "'");
    }
    return v;
  }

  int class_id(std::string_view field) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
      fail("bad type value '" + std::string(field) + "'");
    }
    if (!is_valid_class(v)) fail("type " + std::to_string(v) + " outside [0, 20]");
    return v;
  }

  Quad quad(const std::vector<std::string_view>& f) const {
    static constexpr const char* kNames[8] = {"x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4"};
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
      q.corners[i] = {number(f[1 + 2 * i], kNames[2 * i]), number(f[2 + 2 * i], kNames[2 * i + 1])};
    }
    try {
      (void)quad_to_bbox(q);
    } catch (const DegenerateGeometry& e) {
      fail(e.what());
    }
    return q;
  }
};

// Calls on_row(fields, parser) for each data row after validating the header.
template <typename OnRow>
void parse_csv(std::istream& in, const std::string& source, std::string_view header,
               std::size_t n_fields, OnRow&& on_row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    if (!seen_header) {
      if (view != header) {
        throw ParseError(source, line_no, "expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    const auto fields = split_fields(view);
    RowParser parser{source, line_no};
    if (fields.size() != n_fields) {
      parser.fail("expected " + std::to_string(n_fields) + " fields, got " +
                  std::to_string(fields.size()));
    }
    if (fields[0].empty()) parser.fail("empty filename");
    on_row(fields, parser);
  }
  if (in.bad()) throw IoError(source + ": read error");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_quad(std::ostream& out, const Quad& q) {
  for (const Point& p : q.corners) out << ',' << format_number(p.x) << ',' << format_number(p.y);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<GroundTruthRecord> parse_labels(std::istream& in, const std::string& source) {
  std::vector<GroundTruthRecord> out;
  parse_csv(in, source, kLabelHeader, 10, [&](const auto& f, const RowParser& p) {
    out.push_back({std::string(f[0]), p.quad(f), p.class_id(f[9])});
  });
  return out;
}

std::vector<GroundTruthRecord> read_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_labels(in, path.string());
}

std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> out;
  parse_csv(in, source, kPredictionHeader, 11, [&](const auto& f, const RowParser& p) {
    const double s = p.number(f[10], "score");
    if (!(s >= 0.0 && s <= 1.0)) p.fail("score outside [0, 1]");
    out.push_back({std::string(f[0]), p.quad(f), p.class_id(f[9]), s});
  });
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_predictions(in, path.string());
}

void write_labels(const std::filesystem::path& path, std::span<const GroundTruthRecord> records) {
  auto out = open_output(path);
  out << kLabelHeader << '\n';
  for (const auto& r : records) {
    out << r.filename;
    write_quad(out, r.quad);
    out << ',' << r.class_id << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records) {
  auto out = open_output(path);
  out << kPredictionHeader << '\n';
  for (const auto& r : records) {
    out << r.filename;
    write_quad(out, r.quad);
    out << ',' << r.class_id << ',' << format_number(r.score) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

MatchResult match_image(std::span<const Detection> preds, std::span<const GroundTruthRecord> gts,
                        double iou_gate) {
  std::vector<BBox> hulls;
  hulls.reserve(gts.size());
  for (const auto& g : gts) hulls.push_back(quad_to_bbox(g.quad));

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  MatchResult result;
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<bool> pred_matched(preds.size(), false);
  for (std::size_t pi : order) {
    double best = iou_gate;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) continue;
      const double v = iou(preds[pi].bbox, hulls[gi]);
      if (v > best) {
        best = v;
        best_gt = gi;
      }
    }
    if (best_gt < gts.size()) {
      gt_taken[best_gt] = true;
      pred_matched[pi] = true;
      result.pairs.push_back({pi, best_gt, best});
    }
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!pred_matched[i]) result.unmatched_preds.push_back(i);
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gt_taken[i]) result.unmatched_gts.push_back(i);
  }
  return result;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

void ClassMetrics::recompute() {
  precision_defined = tp + fp > 0;
  recall_defined = tp + fn > 0;
  precision = precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  recall = recall_defined ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  f1 = f1_score(precision, recall);
}

double MetricsReport::macro_f1() const {
  double sum = 0;
  int n = 0;
  for (const ClassMetrics& c : per_class) {
    if (c.tp + c.fp + c.fn == 0) continue;
    sum += c.f1;
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

void MetricsReport::recompute() {
  overall.recompute();
  for (ClassMetrics& c : per_class) c.recompute();
}

MetricsReport score(const MatchResult& matches, std::span<const Detection> preds,
                    std::span<const GroundTruthRecord> gts) {
  MetricsReport r;
  std::vector<bool> pred_tp(preds.size(), false);
  std::vector<bool> gt_tp(gts.size(), false);
  for (const MatchPair& m : matches.pairs) {
    const int pc = preds[m.pred].class_id;
    const int gc = gts[m.gt].class_id;
    r.confusion[static_cast<std::size_t>(gc)][static_cast<std::size_t>(pc)] += 1;
    if (pc == gc) {
      pred_tp[m.pred] = true;
      gt_tp[m.gt] = true;
    }
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ClassMetrics& c = r.per_class[static_cast<std::size_t>(preds[i].class_id)];
    if (pred_tp[i]) {
      ++c.tp;
      ++r.overall.tp;
    } else {
      ++c.fp;
      ++r.overall.fp;
    }
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gt_tp[i]) continue;
    ++r.per_class[static_cast<std::size_t>(gts[i].class_id)].fn;
    ++r.overall.fn;
  }
  r.recompute();
  return r;
}

MetricsReport aggregate(std::span<const MetricsReport> reports) {
  MetricsReport total;
  const auto add = [](ClassMetrics& into, const ClassMetrics& from) {
    into.tp += from.tp;
    into.fp += from.fp;
    into.fn += from.fn;
  };
  for (const MetricsReport& r : reports) {
    add(total.overall, r.overall);
    for (std::size_t c = 0; c < total.per_class.size(); ++c) {
      add(total.per_class[c], r.per_class[c]);
      for (std::size_t p = 0; p < total.per_class.size(); ++p) total.confusion[c][p] += r.confusion[c][p];
    }
  }
  total.recompute();
  return total;
}

Detection to_detection(const PredictionRecord& p) {
  return {quad_to_bbox(p.quad), p.class_id, p.score};
}

PredictionRecord to_prediction(const std::string& filename, const Detection& d) {
  return {filename, bbox_to_quad(d.bbox), d.class_id, d.score};
}

MetricsReport evaluate(std::span<const GroundTruthRecord> gts,
                       std::span<const PredictionRecord> preds, double iou_gate) {
  struct PerImage {
    std::vector<GroundTruthRecord> gts;
    std::vector<Detection> preds;
  };
  std::map<std::string, PerImage> images;
  for (const auto& g : gts) images[g.filename].gts.push_back(g);
  for (const auto& p : preds) images[p.filename].preds.push_back(to_detection(p));

  std::vector<MetricsReport> reports;
  reports.reserve(images.size());
  for (const auto& [name, img] : images) {
    const MatchResult m = match_image(img.preds, img.gts, iou_gate);
    reports.push_back(score(m, img.preds, img.gts));
  }
  return aggregate(reports);
}

namespace {

std::string rate(double v, bool defined) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  if (!defined) s << '*';
  return s.str();
}

}  // namespace

void write_report_text(std::ostream& out, const MetricsReport& r) {
  const ClassMetrics& o = r.overall;
  out << "overall (micro): TP=" << o.tp << " FP=" << o.fp << " FN=" << o.fn
      << " precision=" << rate(o.precision, o.precision_defined)
      << " recall=" << rate(o.recall, o.recall_defined) << " F1=" << rate(o.f1, true) << '\n';
  out << "macro F1 over present classes: " << rate(r.macro_f1(), true) << '\n';
  out << '\n' << "class  tp     fp     fn     precision  recall     f1        name\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    if (m.tp + m.fp + m.fn == 0) continue;
    out << std::left << std::setw(7) << c << std::setw(7) << m.tp << std::setw(7) << m.fp
        << std::setw(7) << m.fn << std::setw(11) << rate(m.precision, m.precision_defined)
        << std::setw(11) << rate(m.recall, m.recall_defined) << std::setw(10) << rate(m.f1, true)
        << kClassNames[c] << '\n';
  }
  out << std::right;

  bool any_confusion = false;
  for (std::size_t g = 0; g < r.confusion.size(); ++g) {
    for (std::size_t p = 0; p < r.confusion.size(); ++p) {
      if (g == p || r.confusion[g][p] == 0) continue;
      if (!any_confusion) out << "\nmisclassified matches (gt -> predicted):\n";
      any_confusion = true;
      out << "  " << g << " -> " << p << ": " << r.confusion[g][p] << '\n';
    }
  }
  out << "\n* rate undefined (zero denominator), reported as 0\n";
  out << "class 0 (others) is scored as a regular class\n";
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << "class,name,tp,fp,fn,precision,recall,f1\n";
  const auto row = [&](const std::string& id, std::string_view name, const ClassMetrics& m) {
    out << id << ',' << name << ',' << m.tp << ',' << m.fp << ',' << m.fn << ','
        << format_number(m.precision) << ',' << format_number(m.recall) << ','
        << format_number(m.f1) << '\n';
  };
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    row(std::to_string(c), kClassNames[c], r.per_class[c]);
  }
  row("all", "micro", r.overall);
}

}  // namespace tsdet
