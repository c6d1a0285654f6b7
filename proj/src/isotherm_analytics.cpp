#include "figmine/isotherm_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"

namespace figmine::isotherm {

namespace {

constexpr double kAvogadro = 6.02214076e23;      // 1/mol
constexpr double kN2CrossSection = 0.162e-18;    // m²
constexpr double kMolarVolumeStp = 22414.0;      // cm³/mol
constexpr double kN2MolarMass = 28.0134;         // g/mol
constexpr double kN2LiquidDensity = 0.808;       // g/cm³

void sort_branch(std::vector<CurvePoint>& branch) {
  std::sort(branch.begin(), branch.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.p_rel < b.p_rel; });
  // merge duplicate pressures so the branch is strictly increasing
  std::vector<CurvePoint> merged;
  for (const CurvePoint& p : branch) {
    if (!merged.empty() && merged.back().p_rel == p.p_rel) {
      merged.back().uptake = 0.5 * (merged.back().uptake + p.uptake);
    } else {
      merged.push_back(p);
    }
  }
  branch = std::move(merged);
}

// Linear interpolation of uptake at p; requires p within the branch span.
double interpolate(const std::vector<CurvePoint>& branch, double p) {
  auto it = std::lower_bound(branch.begin(), branch.end(), p,
                             [](const CurvePoint& pt, double value) { return pt.p_rel < value; });
  if (it == branch.end()) return branch.back().uptake;
  if (it == branch.begin()) return branch.front().uptake;
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  double t = (p - lo.p_rel) / (hi.p_rel - lo.p_rel);
  return lo.uptake + t * (hi.uptake - lo.uptake);
}

}  // namespace

IsothermCurve curve_from_rows(const std::vector<std::vector<std::string>>& rows,
                              const std::vector<std::string>& header,
                              const std::string& source_name) {
  int p_col = -1, v_col = -1, b_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "p_rel") p_col = static_cast<int>(i);
    if (header[i] == "uptake") v_col = static_cast<int>(i);
    if (header[i] == "branch") b_col = static_cast<int>(i);
  }
  if (p_col < 0 || v_col < 0) {
    throw ValidationError("isotherm: " + source_name + " must have p_rel and uptake columns");
  }

  struct Raw {
    double p, v;
    std::string branch;
  };
  std::vector<Raw> raw;
  std::vector<std::string> bad_rows;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() <= static_cast<size_t>(std::max(p_col, v_col))) {
      bad_rows.push_back("row " + std::to_string(i + 2) + ": too few fields");
      continue;
    }
    Raw r;
    try {
      r.p = std::stod(row[p_col]);
      r.v = std::stod(row[v_col]);
    } catch (...) {
      bad_rows.push_back("row " + std::to_string(i + 2) + ": non-numeric value");
      continue;
    }
    if (r.p < 0 || r.p > 1) {
      bad_rows.push_back("row " + std::to_string(i + 2) + ": p_rel " + row[p_col] +
                         " outside [0,1]");
      continue;
    }
    if (r.v < 0) {
      bad_rows.push_back("row " + std::to_string(i + 2) + ": negative uptake " + row[v_col]);
      continue;
    }
    if (b_col >= 0 && row.size() > static_cast<size_t>(b_col)) r.branch = row[b_col];
    raw.push_back(r);
  }
  if (!bad_rows.empty()) {
    std::string msg = "isotherm: invalid rows in " + source_name + ":";
    for (const auto& b : bad_rows) msg += " [" + b + "]";
    throw ValidationError(msg);
  }
  if (raw.empty()) throw ValidationError("isotherm: no data points in " + source_name);

  IsothermCurve curve;
  if (b_col >= 0) {
    for (const Raw& r : raw) {
      if (r.branch == "des" || r.branch == "desorption") {
        curve.desorption.push_back({r.p, r.v});
      } else {
        curve.adsorption.push_back({r.p, r.v});
      }
    }
  } else {
    // ascending prefix up to the pressure apex is the adsorption branch
    size_t apex = 0;
    for (size_t i = 1; i < raw.size(); ++i) {
      if (raw[i].p >= raw[apex].p) apex = i;
    }
    for (size_t i = 0; i < raw.size(); ++i) {
      if (i <= apex) {
        curve.adsorption.push_back({raw[i].p, raw[i].v});
      } else {
        curve.desorption.push_back({raw[i].p, raw[i].v});
      }
    }
  }
  sort_branch(curve.adsorption);
  sort_branch(curve.desorption);
  return curve;
}

IsothermCurve load_curve(const std::filesystem::path& points_file) {
  csv::Table table = csv::read_file(points_file);
  IsothermCurve curve = curve_from_rows(table.rows, table.header, points_file.string());
  curve.compound = points_file.stem().string();
  return curve;
}

std::optional<Plateau> detect_plateau(const IsothermCurve& curve, double slope_eps,
                                      double p_cutoff) {
  std::vector<CurvePoint> pts;
  for (const CurvePoint& p : curve.adsorption) {
    if (p.p_rel <= p_cutoff) pts.push_back(p);
  }
  if (pts.size() < 4) {
    throw ValidationError("isotherm: plateau detection needs >= 4 adsorption points at p/p0 <= " +
                          parser::format_number(p_cutoff));
  }
  double max_uptake = 0;
  for (const CurvePoint& p : pts) max_uptake = std::max(max_uptake, p.uptake);
  if (max_uptake <= 0) max_uptake = 1;  // flat-zero curve: every slope is 0

  size_t n_segments = pts.size() - 1;
  std::vector<bool> flat(n_segments);
  for (size_t i = 0; i < n_segments; ++i) {
    double dp = pts[i + 1].p_rel - pts[i].p_rel;
    double slope = dp > 0 ? (pts[i + 1].uptake - pts[i].uptake) / dp : 0.0;
    flat[i] = std::abs(slope) / max_uptake <= slope_eps;
  }

  // longest maximal run of flat segments; earliest wins ties
  size_t best_start = 0, best_len = 0;
  size_t run_start = 0, run_len = 0;
  for (size_t i = 0; i <= n_segments; ++i) {
    if (i < n_segments && flat[i]) {
      if (run_len == 0) run_start = i;
      ++run_len;
    } else {
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
      run_len = 0;
    }
  }
  if (best_len < 2) return std::nullopt;

  Plateau plateau{pts[best_start].uptake, pts[best_start].uptake};
  for (size_t i = best_start; i <= best_start + best_len; ++i) {
    plateau.lo = std::min(plateau.lo, pts[i].uptake);
    plateau.hi = std::max(plateau.hi, pts[i].uptake);
  }
  return plateau;
}

parser::TriState detect_hysteresis(const IsothermCurve& curve, double gap_tol) {
  if (curve.desorption.empty() || curve.adsorption.size() < 2) return parser::TriState::unknown;

  double ads_lo = curve.adsorption.front().p_rel;
  double ads_hi = curve.adsorption.back().p_rel;
  double max_uptake = 0;
  for (const CurvePoint& p : curve.adsorption) max_uptake = std::max(max_uptake, p.uptake);
  for (const CurvePoint& p : curve.desorption) max_uptake = std::max(max_uptake, p.uptake);
  if (max_uptake <= 0) return parser::TriState::no;

  int shared = 0;
  double max_gap = 0;
  for (const CurvePoint& d : curve.desorption) {
    if (d.p_rel < ads_lo || d.p_rel > ads_hi) continue;
    ++shared;
    max_gap = std::max(max_gap, d.uptake - interpolate(curve.adsorption, d.p_rel));
  }
  if (shared < 3) return parser::TriState::unknown;
  return max_gap > gap_tol * max_uptake ? parser::TriState::yes : parser::TriState::no;
}

double k_bet() { return kAvogadro * kN2CrossSection / kMolarVolumeStp; }

double k_liquid_n2() { return kN2MolarMass / (kMolarVolumeStp * kN2LiquidDensity); }

PorosityResult bet_surface_area(const IsothermCurve& curve, BetRange fit_range) {
  if (fit_range.lo >= fit_range.hi) throw UsageError("bet: empty fit range");
  std::vector<CurvePoint> pts;
  for (const CurvePoint& p : curve.adsorption) {
    if (p.p_rel >= fit_range.lo && p.p_rel <= fit_range.hi && p.uptake > 0 && p.p_rel < 1) {
      pts.push_back(p);
    }
  }
  if (pts.size() < 3) {
    throw ValidationError("bet: needs >= 3 adsorption points inside [" +
                          parser::format_number(fit_range.lo) + ", " +
                          parser::format_number(fit_range.hi) + "], found " +
                          std::to_string(pts.size()));
  }

  // y = x / (V (1 - x)) against x
  double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const CurvePoint& p : pts) {
    double x = p.p_rel;
    double y = x / (p.uptake * (1.0 - x));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw ValidationError("bet: degenerate pressure spread");
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  if (slope + intercept <= 0) {
    throw ValidationError("bet: unphysical fit (slope + intercept <= 0)");
  }

  PorosityResult result;
  result.points_used = static_cast<int>(pts.size());
  result.v_monolayer = 1.0 / (slope + intercept);
  result.bet_c = intercept != 0 ? slope / intercept + 1.0
                                : std::numeric_limits<double>::infinity();
  result.surface_area = result.v_monolayer * k_bet();

  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (const CurvePoint& p : pts) {
    double x = p.p_rel;
    double y = x / (p.uptake * (1.0 - x));
    double fit = slope * x + intercept;
    ss_res += (y - fit) * (y - fit);
  }
  result.fit_r2 = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return result;
}

double pore_volume(const IsothermCurve& curve, double p_eval) {
  if (curve.adsorption.size() < 2) {
    throw ValidationError("isotherm: pore volume needs >= 2 adsorption points");
  }
  if (p_eval < curve.adsorption.front().p_rel || p_eval > curve.adsorption.back().p_rel) {
    throw ValidationError("isotherm: p_eval " + parser::format_number(p_eval) +
                          " outside adsorption branch span [" +
                          parser::format_number(curve.adsorption.front().p_rel) + ", " +
                          parser::format_number(curve.adsorption.back().p_rel) + "]");
  }
  return interpolate(curve.adsorption, p_eval) * k_liquid_n2();
}

}  // namespace figmine::isotherm
