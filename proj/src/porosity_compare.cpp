#include "figmine/porosity_compare.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/response_parser.hpp"

namespace figmine::compare {

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses "1234", "1234.5" or "<10" (below-detection bound).
double parse_measured(const std::string& text, bool& below_detection, const std::string& what) {
  std::string t = trim(text);
  below_detection = false;
  if (!t.empty() && t[0] == '<') {
    below_detection = true;
    t = trim(t.substr(1));
  }
  try {
    size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    if (v < 0) throw ValidationError("compare: negative " + what + " value '" + text + "'");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (...) {
    throw ValidationError("compare: cannot parse " + what + " value '" + text + "'");
  }
}

}  // namespace

ComputedDb ComputedDb::load(const std::filesystem::path& table) {
  ComputedDb db;
  csv::Table data = csv::read_file(table);
  if (data.header.empty() && data.rows.empty()) return db;  // empty file: empty table

  int refcode = data.column("refcode");
  int calc_sa = data.column("calc_sa");
  int calc_pv = data.column("calc_pv");
  int doi = data.column("doi");
  if (refcode < 0 || calc_sa < 0 || calc_pv < 0 || doi < 0) {
    throw ValidationError("compare: computed db " + table.string() +
                          " needs columns refcode, calc_sa, calc_pv, doi");
  }
  for (const auto& row : data.rows) {
    ComputedEntry entry;
    entry.refcode = upper(trim(row[refcode]));
    if (entry.refcode.empty()) throw ValidationError("compare: empty refcode in " + table.string());
    try {
      entry.calc_sa = std::stod(row[calc_sa]);
      entry.calc_pv = std::stod(row[calc_pv]);
    } catch (...) {
      throw ValidationError("compare: non-numeric calculated value for " + entry.refcode);
    }
    if (entry.calc_sa < 0 || entry.calc_pv < 0) {
      throw ValidationError("compare: negative calculated value for " + entry.refcode);
    }
    entry.doi = row[doi];
    if (!db.entries_.emplace(entry.refcode, entry).second) {
      throw ValidationError("compare: duplicate refcode " + entry.refcode + " in " + table.string());
    }
  }
  return db;
}

const ComputedEntry* ComputedDb::find(const std::string& refcode) const {
  auto it = entries_.find(upper(refcode));
  return it == entries_.end() ? nullptr : &it->second;
}

CompareResult run_compare(const std::vector<ExperimentalRow>& experimental, const ComputedDb& db) {
  CompareResult result;
  for (const ExperimentalRow& row : experimental) {
    const ComputedEntry* entry = db.find(row.refcode);
    if (!entry) {
      result.unmatched.push_back(row.refcode);
      continue;
    }
    CompoundComparison cmp;
    cmp.compound = row.compound;
    cmp.refcode = entry->refcode;
    cmp.doi = entry->doi;
    cmp.calc_sa = entry->calc_sa;
    cmp.calc_pv = entry->calc_pv;
    cmp.exp_sa = row.exp_sa;
    cmp.exp_pv = row.exp_pv;
    cmp.sa_below_detection = row.sa_below_detection;
    cmp.author_reported_sa = row.author_reported_sa;
    if (entry->calc_sa > 0) {
      cmp.ratio_sa = row.exp_sa / entry->calc_sa;
      cmp.percent_of_theory = 100.0 * *cmp.ratio_sa;
    }
    if (entry->calc_pv > 0) cmp.ratio_pv = row.exp_pv / entry->calc_pv;
    result.rows.push_back(std::move(cmp));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const CompoundComparison& a, const CompoundComparison& b) {
                     return a.calc_sa > b.calc_sa;
                   });
  return result;
}

std::vector<ExperimentalRow> load_experimental(const std::filesystem::path& extracted,
                                               const std::filesystem::path* mapping,
                                               std::vector<std::string>* unmapped) {
  csv::Table data = csv::read_file(extracted);
  int compound = data.column("compound");
  int refcode = data.column("refcode");
  int doi = data.column("doi");
  int exp_sa = data.column("exp_sa");
  int exp_pv = data.column("exp_pv");
  int author_sa = data.column("author_sa");
  if (compound < 0 || exp_sa < 0 || exp_pv < 0) {
    throw ValidationError("compare: extracted table " + extracted.string() +
                          " needs columns compound, exp_sa, exp_pv");
  }
  if (refcode < 0 && !mapping) {
    throw ValidationError("compare: extracted table lacks refcode column and no mapping given");
  }

  // mapping: (doi, compound) -> refcode
  std::map<std::pair<std::string, std::string>, std::string> map_index;
  if (mapping) {
    csv::Table map_table = csv::read_file(*mapping);
    int m_doi = map_table.column("doi");
    int m_compound = map_table.column("compound");
    int m_refcode = map_table.column("refcode");
    if (m_doi < 0 || m_compound < 0 || m_refcode < 0) {
      throw ValidationError("compare: mapping table needs columns doi, compound, refcode");
    }
    for (const auto& row : map_table.rows) {
      map_index[{row[m_doi], lower(trim(row[m_compound]))}] = upper(trim(row[m_refcode]));
    }
  }

  std::vector<ExperimentalRow> rows;
  for (const auto& row : data.rows) {
    ExperimentalRow exp;
    exp.compound = trim(row[compound]);
    exp.exp_sa = parse_measured(row[exp_sa], exp.sa_below_detection, "exp_sa");
    exp.exp_pv = parse_measured(row[exp_pv], exp.pv_below_detection, "exp_pv");
    if (author_sa >= 0 && static_cast<size_t>(author_sa) < row.size() &&
        !trim(row[author_sa]).empty()) {
      bool ignored = false;
      exp.author_reported_sa = parse_measured(row[author_sa], ignored, "author_sa");
    }
    if (refcode >= 0 && !trim(row[refcode]).empty()) {
      exp.refcode = upper(trim(row[refcode]));
    } else if (mapping) {
      std::string row_doi = doi >= 0 ? row[doi] : "";
      auto hit = map_index.find({row_doi, lower(exp.compound)});
      if (hit == map_index.end()) {
        if (unmapped) unmapped->push_back(exp.compound + " (" + row_doi + ")");
        continue;
      }
      exp.refcode = hit->second;
    }
    rows.push_back(std::move(exp));
  }
  return rows;
}

void emit_scatter(const std::vector<CompoundComparison>& comparisons,
                  const std::filesystem::path& out_dir) {
  if (comparisons.empty()) throw UsageError("compare: no comparisons to emit");
  std::filesystem::create_directories(out_dir);

  csv::Table sa, pv;
  sa.header = {"calc", "exp", "percent_of_theory", "refcode", "doi"};
  pv.header = sa.header;
  for (const auto& c : comparisons) {
    std::string sa_percent =
        c.ratio_sa ? parser::format_number(100.0 * *c.ratio_sa) : std::string();
    std::string pv_percent =
        c.ratio_pv ? parser::format_number(100.0 * *c.ratio_pv) : std::string();
    sa.rows.push_back({parser::format_number(c.calc_sa), parser::format_number(c.exp_sa),
                       sa_percent, c.refcode, c.doi});
    pv.rows.push_back({parser::format_number(c.calc_pv), parser::format_number(c.exp_pv),
                       pv_percent, c.refcode, c.doi});
  }
  csv::write_file(out_dir / "sa_scatter.csv", sa);
  csv::write_file(out_dir / "pv_scatter.csv", pv);
}

void emit_overlay(const std::vector<isotherm::IsothermCurve>& curves,
                  const std::filesystem::path& out, std::vector<std::string>* warnings) {
  if (curves.empty()) throw UsageError("compare: no curves to overlay");
  csv::Table table;
  table.header = {"compound", "doi", "p_rel", "uptake"};
  for (const auto& curve : curves) {
    if (curve.adsorption.empty()) {
      if (warnings) {
        warnings->push_back("overlay: curve '" + curve.compound + "' has no adsorption branch");
      }
      continue;
    }
    for (const auto& point : curve.adsorption) {
      table.rows.push_back({curve.compound, curve.doi, parser::format_number(point.p_rel),
                            parser::format_number(point.uptake)});
    }
  }
  csv::write_file(out, table);
}

std::string render_comparison_table(const std::vector<CompoundComparison>& comparisons) {
  std::ostringstream os;
  os << "Compound                      Refcode   Calc SA   Exp SA    % of theory\n";
  for (const auto& c : comparisons) {
    // experimental value rounded to the nearest ten in the rendered table only
    long exp_rounded = static_cast<long>(std::llround(c.exp_sa / 10.0) * 10);
    char line[160];
    std::string percent = c.percent_of_theory
                              ? [&] {
                                  char buf[32];
                                  std::snprintf(buf, sizeof(buf), "%.1f", *c.percent_of_theory);
                                  return std::string(buf);
                                }()
                              : std::string("N/A");
    std::string exp_text = (c.sa_below_detection ? "<" : "") + std::to_string(exp_rounded);
    std::snprintf(line, sizeof(line), "%-29s %-9s %-9.0f %-9s %s\n", c.compound.c_str(),
                  c.refcode.c_str(), c.calc_sa, exp_text.c_str(), percent.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace figmine::compare
