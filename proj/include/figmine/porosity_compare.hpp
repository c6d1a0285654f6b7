#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "figmine/isotherm_analytics.hpp"

namespace figmine::compare {

struct ComputedEntry {
  std::string refcode;  // CCDC code, uppercase
  double calc_sa = 0;   // m²/g
  double calc_pv = 0;   // cm³/g
  std::string doi;
};

// Computed-properties table keyed by refcode. CSV columns:
// refcode, calc_sa, calc_pv, doi. Duplicate refcodes are a load error.
class ComputedDb {
 public:
  static ComputedDb load(const std::filesystem::path& table);
  const ComputedEntry* find(const std::string& refcode) const;
  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, ComputedEntry> entries_;
};

struct ExperimentalRow {
  std::string compound;
  std::string refcode;
  double exp_sa = 0;
  double exp_pv = 0;
  bool sa_below_detection = false;  // value was reported as "<bound"
  bool pv_below_detection = false;
  std::optional<double> author_reported_sa;  // annotation only
};

struct CompoundComparison {
  std::string compound;
  std::string refcode;
  std::string doi;
  double calc_sa = 0, exp_sa = 0;
  double calc_pv = 0, exp_pv = 0;
  std::optional<double> ratio_sa;  // experimental / calculated
  std::optional<double> ratio_pv;
  std::optional<double> percent_of_theory;  // 100 * ratio_sa
  bool sa_below_detection = false;
  std::optional<double> author_reported_sa;
};

struct CompareResult {
  std::vector<CompoundComparison> rows;      // ordered by descending calc_sa
  std::vector<std::string> unmatched;        // refcodes absent from the db
};

CompareResult run_compare(const std::vector<ExperimentalRow>& experimental,
                          const ComputedDb& db);

// Experimental rows from CSV (compound, refcode?, exp_sa, exp_pv[, author_sa]
// or compound, doi, exp_sa, exp_pv joined through a doi+compound -> refcode
// mapping CSV).
std::vector<ExperimentalRow> load_experimental(const std::filesystem::path& extracted,
                                               const std::filesystem::path* mapping,
                                               std::vector<std::string>* unmapped);

// sa_scatter.csv / pv_scatter.csv: calc, exp, percent_of_theory, refcode, doi.
void emit_scatter(const std::vector<CompoundComparison>& comparisons,
                  const std::filesystem::path& out_dir);

// Long-format overlay of adsorption branches: compound, doi, p_rel, uptake.
void emit_overlay(const std::vector<isotherm::IsothermCurve>& curves,
                  const std::filesystem::path& out,
                  std::vector<std::string>* warnings = nullptr);

// Table-2-style report: rows ordered by descending calc_sa, experimental
// surface areas rounded to the nearest ten in the rendered text only.
std::string render_comparison_table(const std::vector<CompoundComparison>& comparisons);

}  // namespace figmine::compare
