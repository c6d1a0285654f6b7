#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "figmine/eval_harness.hpp"
#include "figmine/response_parser.hpp"

// Independent reference implementations used only to check the production
// code. They deliberately use different techniques (regex, direct recounts,
// closed forms) than the implementations they verify.
namespace figtest::oracle {

// Literal transcription of the reference label-extraction procedure
// (normalize, key checks, regex digit scan) built on std::regex.
std::vector<int> extract_choices(const std::string& output);

struct ClassTally {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct MetricsTally {
  std::array<ClassTally, 6> per_class;
  std::array<std::array<long, 6>, 6> matrix{};
  long n_pages = 0;

  std::optional<double> accuracy(int cls) const;
  std::optional<double> precision(int cls) const;
  std::optional<double> recall(int cls) const;
  std::optional<double> f1(int cls) const;
};

// Brute-force page-by-page recount over (gt, pred) label-vector pairs.
MetricsTally recount(const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs);

// Closed-form BET uptake at relative pressure p.
double bet_uptake(double v_m, double c, double p);

// Direct slope scan for the plateau interval (min/max uptake of the longest
// low-slope run at p <= cutoff); nullopt when no run of >= 2 segments exists.
std::optional<std::pair<double, double>> plateau_scan(
    const std::vector<std::pair<double, double>>& ads_points, double slope_eps, double p_cutoff);

// Randomized synthetic responses for the parser differential test.
std::string random_response(std::mt19937& rng);

// Random label subsets (possibly empty) for metric property tests.
std::vector<int> random_label_subset(std::mt19937& rng);

}  // namespace figtest::oracle
