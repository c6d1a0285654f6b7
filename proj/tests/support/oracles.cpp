#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

namespace figtest::oracle {

std::vector<int> extract_choices(const std::string& output) {
  // normalize newlines and square brackets to spaces, then strip
  std::string normalized;
  for (char c : output) normalized.push_back((c == '\n' || c == '[' || c == ']') ? ' ' : c);
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  normalized.erase(normalized.begin(),
                   std::find_if(normalized.begin(), normalized.end(), not_space));
  normalized.erase(std::find_if(normalized.rbegin(), normalized.rend(), not_space).base(),
                   normalized.end());

  if (normalized.find("Figures:") == std::string::npos) return {6};

  size_t ni = normalized.find("Nitrogen Isotherm:");
  if (ni != std::string::npos) normalized = normalized.substr(0, ni);
  size_t fig = normalized.find("Figures:");
  if (fig != std::string::npos) normalized = normalized.substr(fig);

  static const std::regex digit_in_parens(R"(\((\d)\))");
  std::set<int> choices;
  for (std::sregex_iterator it(normalized.begin(), normalized.end(), digit_in_parens), end;
       it != end; ++it) {
    int value = std::stoi((*it)[1].str());
    if (value >= 1 && value <= 6) choices.insert(value);
  }
  return {choices.begin(), choices.end()};
}

namespace {

std::optional<double> safe_ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool has(const std::vector<int>& labels, int cls) {
  return std::find(labels.begin(), labels.end(), cls) != labels.end();
}

}  // namespace

std::optional<double> MetricsTally::accuracy(int cls) const {
  return safe_ratio(per_class[cls].tp + per_class[cls].tn, n_pages);
}
std::optional<double> MetricsTally::precision(int cls) const {
  return safe_ratio(per_class[cls].tp, per_class[cls].tp + per_class[cls].fp);
}
std::optional<double> MetricsTally::recall(int cls) const {
  return safe_ratio(per_class[cls].tp, per_class[cls].tp + per_class[cls].fn);
}
std::optional<double> MetricsTally::f1(int cls) const {
  auto p = precision(cls);
  auto r = recall(cls);
  if (!p || !r || (*p + *r) == 0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

MetricsTally recount(const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs) {
  MetricsTally tally;
  tally.n_pages = static_cast<long>(pairs.size());
  for (const auto& [gt, pred] : pairs) {
    for (int cls = 1; cls <= 6; ++cls) {
      bool g = has(gt, cls), p = has(pred, cls);
      ClassTally& t = tally.per_class[cls - 1];
      if (g && p) {
        ++t.tp;
      } else if (!g && p) {
        ++t.fp;
      } else if (g && !p) {
        ++t.fn;
      } else {
        ++t.tn;
      }
    }
    for (int cls = 1; cls <= 6; ++cls) {
      if (has(gt, cls) && has(pred, cls)) ++tally.matrix[cls - 1][cls - 1];
    }
    for (int missed = 1; missed <= 6; ++missed) {
      if (!(has(gt, missed) && !has(pred, missed))) continue;
      for (int spurious = 1; spurious <= 6; ++spurious) {
        if (spurious != missed && has(pred, spurious) && !has(gt, spurious)) {
          ++tally.matrix[missed - 1][spurious - 1];
        }
      }
    }
  }
  return tally;
}

double bet_uptake(double v_m, double c, double p) {
  return v_m * c * p / ((1.0 - p) * (1.0 + (c - 1.0) * p));
}

std::optional<std::pair<double, double>> plateau_scan(
    const std::vector<std::pair<double, double>>& ads_points, double slope_eps, double p_cutoff) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& pt : ads_points) {
    if (pt.first <= p_cutoff) pts.push_back(pt);
  }
  double v_max = 0;
  for (const auto& pt : pts) v_max = std::max(v_max, pt.second);
  if (v_max <= 0) v_max = 1;

  size_t best_len = 0, best_start = 0;
  size_t i = 0;
  while (i + 1 < pts.size()) {
    size_t j = i;
    while (j + 1 < pts.size()) {
      double slope = (pts[j + 1].second - pts[j].second) / (pts[j + 1].first - pts[j].first);
      if (std::abs(slope) / v_max > slope_eps) break;
      ++j;
    }
    size_t run = j - i;
    if (run > best_len) {
      best_len = run;
      best_start = i;
    }
    i = (j == i) ? i + 1 : j;
  }
  if (best_len < 2) return std::nullopt;
  double lo = pts[best_start].second, hi = lo;
  for (size_t k = best_start; k <= best_start + best_len; ++k) {
    lo = std::min(lo, pts[k].second);
    hi = std::max(hi, pts[k].second);
  }
  return std::make_pair(lo, hi);
}

std::string random_response(std::mt19937& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> digit(0, 9);
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_int_distribution<int> shape(0, 9);

  std::string out;
  int kind = shape(rng);
  if (kind == 0) return "I cannot see the image.";
  if (kind == 1) out += "Some preamble text.\n";
  if (kind != 2) {
    out += coin(rng) ? "Figures: " : "Figures:[Answer: ";
  } else {
    out += "figures: ";  // wrong case: the reference treats this as missing
  }
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    int d = digit(rng);
    if (coin(rng)) {
      out += "(" + std::to_string(d) + ")";
    } else {
      out += "(" + std::to_string(d) + std::to_string(digit(rng)) + ")";  // multi-digit: ignored
    }
    if (coin(rng)) out += ";";
    if (coin(rng)) out += " ";
  }
  if (coin(rng)) out += "]";
  if (coin(rng)) out += "\nNitrogen Isotherm: Figure " + std::to_string(digit(rng));
  if (coin(rng)) out += "\ntrailing (" + std::to_string(digit(rng)) + ") noise";
  return out;
}

std::vector<int> random_label_subset(std::mt19937& rng) {
  std::uniform_int_distribution<int> coin(0, 3);
  std::vector<int> labels;
  for (int cls = 1; cls <= 6; ++cls) {
    if (coin(rng) == 0) labels.push_back(cls);
  }
  return labels;
}

}  // namespace figtest::oracle
