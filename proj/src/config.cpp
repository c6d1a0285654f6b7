#include "figmine/config.hpp"

#include <cmath>
#include <fstream>

#include "figmine/errors.hpp"

namespace figmine::config {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double positive_number(const std::string& key, const std::string& value) {
  double v = 0;
  try {
    size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (...) {
    throw ValidationError("config: non-numeric value for " + key + ": '" + value + "'");
  }
  if (v <= 0) throw ValidationError("config: " + key + " must be positive, got " + value);
  return v;
}

int positive_int(const std::string& key, const std::string& value) {
  double v = positive_number(key, value);
  long rounded = std::lround(v);
  if (static_cast<double>(rounded) != v) {
    throw ValidationError("config: " + key + " must be an integer, got " + value);
  }
  return static_cast<int>(rounded);
}

}  // namespace

void apply(Config& cfg, const std::string& key, const std::string& value) {
  if (key == "api.base_url") {
    if (value.find("://") == std::string::npos) {
      throw ValidationError("config: api.base_url must be a URL, got '" + value + "'");
    }
    cfg.api.base_url = value;
  } else if (key == "api.model_id") {
    cfg.api.model_id = value;
  } else if (key == "api.key_env_name") {
    cfg.api.api_key_env = value;
  } else if (key == "api.max_tokens") {
    cfg.api.max_tokens = positive_int(key, value);
  } else if (key == "api.timeout_s") {
    cfg.api.timeout_s = positive_number(key, value);
  } else if (key == "batch.concurrency") {
    cfg.batch.concurrency = positive_int(key, value);
  } else if (key == "batch.rate_per_min") {
    cfg.batch.requests_per_minute = positive_number(key, value);
  } else if (key == "batch.max_attempts") {
    cfg.batch.max_attempts = positive_int(key, value);
  } else if (key == "analysis.bet_range") {
    size_t colon = value.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("config: analysis.bet_range expects lo:hi, got '" + value + "'");
    }
    isotherm::BetRange range;
    range.lo = positive_number(key, trim(value.substr(0, colon)));
    range.hi = positive_number(key, trim(value.substr(colon + 1)));
    if (range.lo >= range.hi) {
      throw ValidationError("config: analysis.bet_range lo must be < hi");
    }
    cfg.analysis.bet_range = range;
  } else if (key == "analysis.slope_eps") {
    cfg.analysis.slope_eps = positive_number(key, value);
  } else if (key == "analysis.gap_tol") {
    cfg.analysis.gap_tol = positive_number(key, value);
  } else if (key == "analysis.iou_threshold") {
    cfg.analysis.iou_threshold = positive_number(key, value);
  } else if (key == "cost.usd_per_image") {
    cfg.cost.usd_per_image = positive_number(key, value);
  } else if (key == "cost.seconds_per_request") {
    cfg.cost.seconds_per_request = positive_number(key, value);
  } else if (key == "cost.pages_per_paper") {
    cfg.cost.pages_per_paper = positive_number(key, value);
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

Config load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config: line " + std::to_string(line_no) + " is not key=value: '" +
                            t + "'");
    }
    apply(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace figmine::config
