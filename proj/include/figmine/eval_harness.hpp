#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "figmine/response_parser.hpp"

namespace figmine::eval {

inline constexpr std::array<const char*, 6> kClassNames = {"NI", "PXRD", "TGA",
                                                           "CST", "OI", "NOA"};

enum class Outcome { tp, fp, tn, fn };
const char* to_string(Outcome outcome);

// Per-class binary outcome for one page; index 0 holds class 1.
std::array<Outcome, 6> class_outcomes(const parser::LabelSet& gt, const parser::LabelSet& pred);

struct ClassCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

struct ClassMetrics {
  ClassCounts counts;
  std::optional<double> accuracy, precision, recall, f1;  // nullopt = undefined (N/A)
};

using Confusion = std::array<std::array<long, 6>, 6>;
using LabelPair = std::pair<parser::LabelSet, parser::LabelSet>;  // (gt, pred)

struct MetricsReport {
  std::array<ClassMetrics, 6> per_class;
  Confusion matrix{};
  long n_pages = 0;
};

// Sums per-class outcomes over all pages. Empty input is a usage error.
MetricsReport aggregate(const std::vector<LabelPair>& pairs);

// Diagonal cells count true positives; cell (i, j), i != j, counts pages where
// class i was missed (in gt, not predicted) while class j was predicted
// without being in the ground truth.
Confusion confusion_matrix(const std::vector<LabelPair>& pairs);

double iou(const parser::NormBox& a, const parser::NormBox& b);

struct ComparatorConfig {
  double iou_threshold = 0.5;
  double porosity_rel_tol = 0.01;
};

struct DescriptorEntry {
  long n_scored = 0;
  long n_correct = 0;
  std::optional<double> accuracy() const {
    if (n_scored == 0) return std::nullopt;
    return static_cast<double>(n_correct) / static_cast<double>(n_scored);
  }
};

struct DescriptorScore {
  DescriptorEntry figure, compound, porosity, hysteresis, saturation, position;
};

using KeyedExtraction = std::pair<std::string, parser::IsothermExtraction>;

// preds and gts must cover the same page keys; order is irrelevant.
DescriptorScore score_extractions(const std::vector<KeyedExtraction>& preds,
                                  const std::vector<KeyedExtraction>& gts,
                                  const ComparatorConfig& cfg = {});

// Field comparators (exposed for tests and the report layer).
std::string canonical_figure(std::string_view text);
bool figure_match(std::string_view pred, std::string_view gt);
bool compound_match(const std::vector<std::string>& pred, const std::vector<std::string>& gt);
bool porosity_match(std::string_view pred, std::string_view gt, double rel_tol);
bool saturation_match(const parser::Saturation& pred, const parser::Saturation& gt);
bool position_match(const std::vector<parser::NormBox>& pred,
                    const std::vector<parser::NormBox>& gt, double threshold);

// Per-class metric differences (a minus b) in percentage points.
struct RunDelta {
  struct Entry {
    std::optional<double> accuracy, precision, recall, f1;
  };
  std::array<Entry, 6> per_class;
};
RunDelta compare_runs(const MetricsReport& a, const MetricsReport& b);

}  // namespace figmine::eval
