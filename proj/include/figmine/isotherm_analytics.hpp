#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "figmine/response_parser.hpp"

namespace figmine::isotherm {

struct CurvePoint {
  double p_rel = 0;   // relative pressure p/p0 in [0, 1]
  double uptake = 0;  // cm³(STP)/g
};

struct IsothermCurve {
  std::string compound;
  std::string doi;
  std::vector<CurvePoint> adsorption;  // p_rel strictly increasing
  std::vector<CurvePoint> desorption;  // may be empty
};

// CSV columns: p_rel, uptake[, branch] with branch in {ads, des}. Without a
// branch column the ascending prefix up to the pressure maximum is the
// adsorption branch. Out-of-range pressures or negative uptakes raise a
// validation error naming the offending rows.
IsothermCurve load_curve(const std::filesystem::path& points_file);
IsothermCurve curve_from_rows(const std::vector<std::vector<std::string>>& rows,
                              const std::vector<std::string>& header,
                              const std::string& source_name);

struct Plateau {
  double lo = 0;  // min uptake within the plateau run
  double hi = 0;  // max uptake within the plateau run
};

// Longest run of consecutive low-slope segments on the adsorption branch at
// p/p0 <= p_cutoff; slopes are normalized by the branch's maximum uptake.
// Requires >= 4 in-range points; returns nullopt when no run spans >= 2
// segments.
std::optional<Plateau> detect_plateau(const IsothermCurve& curve, double slope_eps = 0.05,
                                      double p_cutoff = 0.9);

// yes when the desorption branch exceeds the adsorption branch by more than
// gap_tol * max uptake anywhere on the shared pressure range; unknown when
// fewer than 3 desorption points fall inside that range.
parser::TriState detect_hysteresis(const IsothermCurve& curve, double gap_tol = 0.02);

struct BetRange {
  double lo = 0.05;
  double hi = 0.30;
};

struct PorosityResult {
  double v_monolayer = 0;   // cm³(STP)/g
  double bet_c = 0;         // dimensionless; > 0 for a physical fit
  double surface_area = 0;  // m²/g
  double fit_r2 = 0;
  double pore_volume = 0;   // cm³(liquid)/g, filled by the caller when evaluated
  int points_used = 0;
};

// m²/g per cm³(STP)/g: N_A * sigma(N2) / V_molar.
double k_bet();
// cm³(liquid) per cm³(STP): M(N2) / (V_molar * rho_liquid).
double k_liquid_n2();

// Least-squares BET transform fit over adsorption points inside fit_range.
PorosityResult bet_surface_area(const IsothermCurve& curve, BetRange fit_range = {});

// Uptake at p_eval (linear interpolation on the adsorption branch) converted
// to liquid volume. p_eval outside the branch span is a validation error.
double pore_volume(const IsothermCurve& curve, double p_eval = 0.95);

}  // namespace figmine::isotherm
