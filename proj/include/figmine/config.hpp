#pragma once

#include <filesystem>
#include <string>

#include "figmine/eval_harness.hpp"
#include "figmine/isotherm_analytics.hpp"
#include "figmine/vision_client.hpp"

namespace figmine::config {

struct AnalysisConfig {
  isotherm::BetRange bet_range;
  double slope_eps = 0.05;
  double gap_tol = 0.02;
  double iou_threshold = 0.5;
};

struct Config {
  vision::ModelConfig api;
  vision::BatchPolicy batch;
  AnalysisConfig analysis;
  vision::CostModel cost;
};

// Flat key=value file ('#' comments, blank lines allowed). Known keys:
//   api.base_url api.model_id api.key_env_name api.max_tokens api.timeout_s
//   batch.concurrency batch.rate_per_min batch.max_attempts
//   analysis.bet_range (lo:hi) analysis.slope_eps analysis.gap_tol
//   analysis.iou_threshold
//   cost.usd_per_image cost.seconds_per_request cost.pages_per_paper
// Unknown keys and non-positive numeric values are rejected.
Config load_file(const std::filesystem::path& path);

// Applies one key=value assignment onto cfg (shared by the file loader and
// flag overrides).
void apply(Config& cfg, const std::string& key, const std::string& value);

}  // namespace figmine::config
