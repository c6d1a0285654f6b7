#include "figmine/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/porosity_compare.hpp"

namespace figmine::report {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 6> kDisplayNames = {
    "Nitrogen Isotherm",           "Powder X-Ray Diffraction", "Thermogravimetric Analysis",
    "Crystal Structure or Topology", "Other Gas Sorption Isotherm", "None of Above"};

std::string percent_or_na(const std::optional<double>& value) {
  if (!value) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", *value * 100.0);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("report: cannot write " + path.string());
  out << content;
}

}  // namespace

std::vector<parser::ParsedRow> load_parsed_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read_file(path);
  if (!table.has_column("img") || !table.has_column("labels")) {
    throw ValidationError("report: " + path.string() + " needs img and labels columns");
  }
  std::vector<parser::ParsedRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    rows.push_back(parser::parsed_row_from_fields(table.header, row));
  }
  return rows;
}

std::vector<EvalRow> join_rows(const std::vector<parser::ParsedRow>& preds,
                               const std::vector<parser::ParsedRow>& truths) {
  auto index = [](const std::vector<parser::ParsedRow>& rows, const char* what) {
    std::map<std::string, const parser::ParsedRow*> keyed;
    for (const auto& row : rows) {
      if (!keyed.emplace(row.img, &row).second) {
        throw ValidationError(std::string("evaluate: duplicate image key '") + row.img + "' in " +
                              what);
      }
    }
    return keyed;
  };
  auto pred_index = index(preds, "predictions");
  auto truth_index = index(truths, "ground truth");
  if (pred_index.size() != truth_index.size()) {
    throw ValidationError("evaluate: prediction and ground-truth key sets differ (" +
                          std::to_string(pred_index.size()) + " vs " +
                          std::to_string(truth_index.size()) + ")");
  }
  std::vector<EvalRow> rows;
  rows.reserve(pred_index.size());
  for (const auto& [img, pred] : pred_index) {
    auto truth = truth_index.find(img);
    if (truth == truth_index.end()) {
      throw ValidationError("evaluate: image key '" + img + "' missing from ground truth");
    }
    EvalRow row;
    row.img = img;
    row.pred_labels = pred->labels;
    row.gt_labels = truth->second->labels;
    row.has_extraction = pred->has_extraction && truth->second->has_extraction;
    row.pred_extraction = pred->extraction;
    row.gt_extraction = truth->second->extraction;
    rows.push_back(std::move(row));
  }
  return rows;  // std::map iteration keeps this deterministic
}

std::vector<EvalRow> join_pred_truth(const std::filesystem::path& pred_csv,
                                     const std::filesystem::path& truth_csv) {
  return join_rows(load_parsed_csv(pred_csv), load_parsed_csv(truth_csv));
}

std::vector<eval::LabelPair> label_pairs(const std::vector<EvalRow>& rows) {
  std::vector<eval::LabelPair> pairs;
  pairs.reserve(rows.size());
  for (const auto& row : rows) pairs.push_back({row.gt_labels, row.pred_labels});
  return pairs;
}

std::string render_metrics_table(const eval::MetricsReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-31s %-9s %-10s %-8s %s\n", "Plot Type", "Accuracy",
                "Precision", "Recall", "F1 Score");
  out += line;
  for (int c = 0; c < 6; ++c) {
    const auto& m = report.per_class[c];
    std::snprintf(line, sizeof(line), "%-31s %-9s %-10s %-8s %s\n", kDisplayNames[c],
                  percent_or_na(m.accuracy).c_str(), percent_or_na(m.precision).c_str(),
                  percent_or_na(m.recall).c_str(), percent_or_na(m.f1).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "\nPages evaluated: %ld\n", report.n_pages);
  out += line;
  return out;
}

std::string metrics_json(const eval::MetricsReport& report) {
  json root;
  root["n_pages"] = report.n_pages;
  json classes = json::object();
  for (int c = 0; c < 6; ++c) {
    const auto& m = report.per_class[c];
    json entry;
    entry["tp"] = m.counts.tp;
    entry["fp"] = m.counts.fp;
    entry["tn"] = m.counts.tn;
    entry["fn"] = m.counts.fn;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    entry["accuracy"] = opt(m.accuracy);
    entry["precision"] = opt(m.precision);
    entry["recall"] = opt(m.recall);
    entry["f1"] = opt(m.f1);
    classes[eval::kClassNames[c]] = entry;
  }
  root["classes"] = classes;
  json matrix = json::array();
  for (int i = 0; i < 6; ++i) {
    json row = json::array();
    for (int j = 0; j < 6; ++j) row.push_back(report.matrix[i][j]);
    matrix.push_back(row);
  }
  root["confusion_matrix"] = matrix;
  return root.dump(2) + "\n";
}

std::string confusion_csv(const eval::Confusion& matrix) {
  csv::Table table;
  table.header = {""};
  for (const char* name : eval::kClassNames) table.header.push_back(name);
  for (int i = 0; i < 6; ++i) {
    std::vector<std::string> row = {eval::kClassNames[i]};
    for (int j = 0; j < 6; ++j) row.push_back(std::to_string(matrix[i][j]));
    table.rows.push_back(row);
  }
  return csv::serialize(table);
}

std::string descriptor_radar_csv(const std::optional<eval::DescriptorScore>& score) {
  csv::Table table;
  table.header = {"descriptor", "n_scored", "n_correct", "accuracy_percent"};
  auto add = [&](const char* name, const eval::DescriptorEntry& entry) {
    std::string accuracy = "N/A";
    if (auto a = entry.accuracy()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", *a * 100.0);
      accuracy = buf;
    }
    table.rows.push_back({name, std::to_string(entry.n_scored), std::to_string(entry.n_correct),
                          accuracy});
  };
  eval::DescriptorScore empty;
  const eval::DescriptorScore& s = score ? *score : empty;
  add("figure", s.figure);
  add("compound", s.compound);
  add("porosity", s.porosity);
  add("hysteresis", s.hysteresis);
  add("saturation", s.saturation);
  add("position", s.position);
  return csv::serialize(table);
}

std::vector<std::string> write_report_bundle(const std::vector<EvalRow>& rows,
                                             const ReportOptions& options,
                                             const std::filesystem::path& out_dir) {
  if (rows.empty()) throw UsageError("report: no evaluation rows");
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  eval::MetricsReport metrics = eval::aggregate(label_pairs(rows));
  write_text(out_dir / "metrics.txt", render_metrics_table(metrics));
  written.push_back("metrics.txt");
  write_text(out_dir / "metrics.json", metrics_json(metrics));
  written.push_back("metrics.json");
  write_text(out_dir / "confusion_matrix.csv", confusion_csv(metrics.matrix));
  written.push_back("confusion_matrix.csv");

  std::vector<eval::KeyedExtraction> preds, gts;
  for (const auto& row : rows) {
    if (!row.has_extraction) continue;
    preds.push_back({row.img, row.pred_extraction});
    gts.push_back({row.img, row.gt_extraction});
  }
  std::optional<eval::DescriptorScore> score;
  if (!preds.empty()) score = eval::score_extractions(preds, gts, options.comparator);
  write_text(out_dir / "descriptor_radar.csv", descriptor_radar_csv(score));
  written.push_back("descriptor_radar.csv");

  if (options.extracted && options.computed_db) {
    compare::ComputedDb db = compare::ComputedDb::load(*options.computed_db);
    std::vector<std::string> unmapped;
    const std::filesystem::path* mapping = options.mapping ? &*options.mapping : nullptr;
    auto experimental = compare::load_experimental(*options.extracted, mapping, &unmapped);
    compare::CompareResult result = compare::run_compare(experimental, db);
    if (result.rows.empty()) throw UsageError("report: no comparable porosity rows");
    compare::emit_scatter(result.rows, out_dir);
    written.push_back("sa_scatter.csv");
    written.push_back("pv_scatter.csv");
    for (const auto& refcode : result.unmatched) unmapped.push_back(refcode);
    if (!unmapped.empty()) {
      std::string sidecar;
      for (const auto& item : unmapped) sidecar += item + "\n";
      write_text(out_dir / "unmatched.txt", sidecar);
      written.push_back("unmatched.txt");
    }
  }

  if (!options.curves.empty()) {
    std::vector<isotherm::IsothermCurve> curves;
    curves.reserve(options.curves.size());
    for (const auto& path : options.curves) curves.push_back(isotherm::load_curve(path));
    compare::emit_overlay(curves, out_dir / "overlay.csv");
    written.push_back("overlay.csv");
  }
  return written;
}

}  // namespace figmine::report
