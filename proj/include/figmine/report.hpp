#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "figmine/eval_harness.hpp"
#include "figmine/response_parser.hpp"

namespace figmine::report {

// One evaluation row: predictions and ground truth joined on the image key.
struct EvalRow {
  std::string img;
  parser::LabelSet gt_labels, pred_labels;
  bool has_extraction = false;
  parser::IsothermExtraction gt_extraction, pred_extraction;
};

// Rows of a parsed/ground-truth CSV (columns img, labels plus optional
// descriptor columns), keyed by img.
std::vector<parser::ParsedRow> load_parsed_csv(const std::filesystem::path& path);

// Joins predictions with ground truth; mismatched image-key sets are a
// validation error.
std::vector<EvalRow> join_rows(const std::vector<parser::ParsedRow>& preds,
                               const std::vector<parser::ParsedRow>& truths);
std::vector<EvalRow> join_pred_truth(const std::filesystem::path& pred_csv,
                                     const std::filesystem::path& truth_csv);

std::vector<eval::LabelPair> label_pairs(const std::vector<EvalRow>& rows);

// Rendering helpers; all output is deterministic.
std::string render_metrics_table(const eval::MetricsReport& report);
std::string metrics_json(const eval::MetricsReport& report);
std::string confusion_csv(const eval::Confusion& matrix);
std::string descriptor_radar_csv(const std::optional<eval::DescriptorScore>& score);

struct ReportOptions {
  eval::ComparatorConfig comparator;
  // Optional inputs for the scatter files.
  std::optional<std::filesystem::path> extracted;
  std::optional<std::filesystem::path> computed_db;
  std::optional<std::filesystem::path> mapping;
  // Optional curve point files for the overlay.
  std::vector<std::filesystem::path> curves;
};

// Writes metrics.txt, metrics.json, confusion_matrix.csv and
// descriptor_radar.csv; adds sa_scatter.csv/pv_scatter.csv when the porosity
// inputs are present and overlay.csv when curves are given. Returns the file
// names written, in emission order.
std::vector<std::string> write_report_bundle(const std::vector<EvalRow>& rows,
                                             const ReportOptions& options,
                                             const std::filesystem::path& out_dir);

}  // namespace figmine::report
