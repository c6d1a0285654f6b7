#include "figmine/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>

#include "figmine/errors.hpp"

namespace figmine::eval {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void erase_all(std::string& text, std::string_view needle) {
  size_t at;
  while ((at = text.find(needle)) != std::string::npos) text.erase(at, needle.size());
}

std::optional<double> first_number(std::string_view s) {
  for (size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isdigit(c) || (c == '.' && i + 1 < s.size() &&
                            std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::string tail(s.substr(i));
      char* end = nullptr;
      double v = std::strtod(tail.c_str(), &end);
      if (end != tail.c_str()) return v;
    }
  }
  return std::nullopt;
}

std::optional<double> ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Augmenting-path bipartite matching over the IoU-eligible pairs.
bool try_assign(int i, const std::vector<std::vector<int>>& adj, std::vector<int>& match_of,
                std::vector<bool>& visited) {
  for (int j : adj[i]) {
    if (visited[j]) continue;
    visited[j] = true;
    if (match_of[j] < 0 || try_assign(match_of[j], adj, match_of, visited)) {
      match_of[j] = i;
      return true;
    }
  }
  return false;
}

}  // namespace

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::tp: return "TP";
    case Outcome::fp: return "FP";
    case Outcome::tn: return "TN";
    case Outcome::fn: return "FN";
  }
  return "?";
}

std::array<Outcome, 6> class_outcomes(const parser::LabelSet& gt, const parser::LabelSet& pred) {
  std::array<Outcome, 6> outcomes{};
  for (int cls = 1; cls <= 6; ++cls) {
    bool in_gt = gt.contains(cls);
    bool in_pred = pred.contains(cls);
    Outcome o = in_gt ? (in_pred ? Outcome::tp : Outcome::fn)
                      : (in_pred ? Outcome::fp : Outcome::tn);
    outcomes[cls - 1] = o;
  }
  return outcomes;
}

MetricsReport aggregate(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw UsageError("evaluate: no (ground truth, prediction) pairs");
  MetricsReport report;
  report.n_pages = static_cast<long>(pairs.size());
  for (const auto& [gt, pred] : pairs) {
    auto outcomes = class_outcomes(gt, pred);
    for (int c = 0; c < 6; ++c) {
      ClassCounts& counts = report.per_class[c].counts;
      switch (outcomes[c]) {
        case Outcome::tp: ++counts.tp; break;
        case Outcome::fp: ++counts.fp; break;
        case Outcome::tn: ++counts.tn; break;
        case Outcome::fn: ++counts.fn; break;
      }
    }
  }
  for (auto& m : report.per_class) {
    const ClassCounts& c = m.counts;
    m.accuracy = ratio(c.tp + c.tn, report.n_pages);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0) {
      m.f1 = 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
  }
  report.matrix = confusion_matrix(pairs);
  return report;
}

Confusion confusion_matrix(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw UsageError("evaluate: no (ground truth, prediction) pairs");
  Confusion matrix{};
  for (const auto& [gt, pred] : pairs) {
    for (int c = 1; c <= 6; ++c) {
      if (gt.contains(c) && pred.contains(c)) ++matrix[c - 1][c - 1];
    }
    for (int missed = 1; missed <= 6; ++missed) {
      if (!gt.contains(missed) || pred.contains(missed)) continue;
      for (int predicted = 1; predicted <= 6; ++predicted) {
        if (predicted == missed) continue;
        if (pred.contains(predicted) && !gt.contains(predicted)) {
          ++matrix[missed - 1][predicted - 1];
        }
      }
    }
  }
  return matrix;
}

double iou(const parser::NormBox& a, const parser::NormBox& b) {
  double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = ix * iy;
  double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  double uni = area_a + area_b - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::string canonical_figure(std::string_view text) {
  std::string t = lower(text);
  erase_all(t, "figures");
  erase_all(t, "figure");
  erase_all(t, "fig.");
  erase_all(t, "fig");
  std::string out;
  for (unsigned char c : t) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

bool figure_match(std::string_view pred, std::string_view gt) {
  return canonical_figure(pred) == canonical_figure(gt);
}

bool compound_match(const std::vector<std::string>& pred, const std::vector<std::string>& gt) {
  auto canon = [](const std::vector<std::string>& names) {
    std::vector<std::string> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(lower(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  return canon(pred) == canon(gt);
}

bool porosity_match(std::string_view pred, std::string_view gt, double rel_tol) {
  auto p = first_number(pred);
  auto g = first_number(gt);
  if (p && g) {
    if (*g == 0) return *p == 0;
    return std::abs(*p - *g) <= rel_tol * std::abs(*g);
  }
  // canonical string comparison (case-insensitive, whitespace collapsed)
  auto canon = [](std::string_view s) {
    std::string out;
    bool pending = false;
    for (unsigned char c : lower(s)) {
      if (std::isspace(c)) {
        pending = !out.empty();
      } else {
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(static_cast<char>(c));
      }
    }
    return out;
  };
  return canon(pred) == canon(gt);
}

bool saturation_match(const parser::Saturation& pred, const parser::Saturation& gt) {
  using State = parser::Saturation::State;
  if (pred.state != gt.state) return false;
  if (pred.state != State::interval) return true;  // N/A matches N/A, unknown matches unknown
  return pred.lo <= gt.hi && gt.lo <= pred.hi;
}

bool position_match(const std::vector<parser::NormBox>& pred,
                    const std::vector<parser::NormBox>& gt, double threshold) {
  if (pred.size() != gt.size()) return false;
  if (gt.empty()) return true;
  int n = static_cast<int>(gt.size());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (iou(gt[i], pred[j]) >= threshold) adj[i].push_back(j);
    }
  }
  std::vector<int> match_of(n, -1);
  for (int i = 0; i < n; ++i) {
    std::vector<bool> visited(n, false);
    if (!try_assign(i, adj, match_of, visited)) return false;
  }
  return true;
}

DescriptorScore score_extractions(const std::vector<KeyedExtraction>& preds,
                                  const std::vector<KeyedExtraction>& gts,
                                  const ComparatorConfig& cfg) {
  std::map<std::string, const parser::IsothermExtraction*> by_key;
  for (const auto& [key, ext] : gts) by_key[key] = &ext;
  if (by_key.size() != gts.size()) throw UsageError("score: duplicate ground-truth keys");
  if (preds.size() != gts.size()) {
    throw UsageError("score: prediction and ground-truth sets differ in size");
  }

  DescriptorScore score;
  auto tally = [](DescriptorEntry& entry, bool correct) {
    ++entry.n_scored;
    if (correct) ++entry.n_correct;
  };
  for (const auto& [key, pred] : preds) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw UsageError("score: prediction key '" + key + "' missing from ground truth");
    const parser::IsothermExtraction& gt = *it->second;
    tally(score.figure, figure_match(pred.figure_locator, gt.figure_locator));
    tally(score.compound, compound_match(pred.compounds, gt.compounds));
    tally(score.porosity, porosity_match(pred.porosity, gt.porosity, cfg.porosity_rel_tol));
    tally(score.hysteresis, pred.hysteresis == gt.hysteresis);
    tally(score.saturation, saturation_match(pred.saturation, gt.saturation));
    tally(score.position, position_match(pred.regions, gt.regions, cfg.iou_threshold));
  }
  return score;
}

RunDelta compare_runs(const MetricsReport& a, const MetricsReport& b) {
  RunDelta delta;
  auto diff = [](const std::optional<double>& x,
                 const std::optional<double>& y) -> std::optional<double> {
    if (!x || !y) return std::nullopt;
    return (*x - *y) * 100.0;  // percentage points
  };
  for (int c = 0; c < 6; ++c) {
    delta.per_class[c].accuracy = diff(a.per_class[c].accuracy, b.per_class[c].accuracy);
    delta.per_class[c].precision = diff(a.per_class[c].precision, b.per_class[c].precision);
    delta.per_class[c].recall = diff(a.per_class[c].recall, b.per_class[c].recall);
    delta.per_class[c].f1 = diff(a.per_class[c].f1, b.per_class[c].f1);
  }
  return delta;
}

}  // namespace figmine::eval
