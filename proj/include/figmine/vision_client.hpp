#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "figmine/corpus_ingest.hpp"
#include "figmine/pipeline_store.hpp"
#include "figmine/prompt_kit.hpp"

namespace figmine::vision {

struct ModelConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_id = "gpt-4-vision-preview";
  int max_tokens = 300;  // prompt-template default; extraction runs want more
  double timeout_s = 120.0;
  std::string api_key_env = "FIGMINE_API_KEY";
};

struct CostModel {
  double usd_per_image = 0.02;
  double seconds_per_request = 5.2;
  double pages_per_paper = 18.0;
};

struct Backoff {
  double initial_s = 2.0;
  double multiplier = 2.0;
  double cap_s = 60.0;

  double delay_for_attempt(int attempt) const;  // attempt is 1-based
};

struct BatchPolicy {
  int concurrency = 1;
  double requests_per_minute = 60.0;
  int max_attempts = 3;
  Backoff backoff;
  store::ScreenPolicy screen;
};

enum class ExchangeStatus { ok, transport_error, bad_output, exhausted };
const char* to_string(ExchangeStatus status);

struct VisionExchange {
  std::string image_ref;
  std::string prompt_version;
  std::string raw_text;
  ExchangeStatus status = ExchangeStatus::transport_error;
  int attempt_count = 0;
  long request_tokens = 0;   // 0 when the backend does not report usage
  long response_tokens = 0;
  double latency_s = 0;
  double cost_usd = 0;
};

struct BackendReply {
  bool transport_ok = false;
  int http_status = 0;
  std::string text;
  long prompt_tokens = -1;    // -1: not reported
  long completion_tokens = -1;
  std::string error;
};

class VisionBackend {
 public:
  virtual ~VisionBackend() = default;
  virtual BackendReply complete(const std::vector<unsigned char>& image_bytes,
                                const std::string& media_type, const std::string& prompt,
                                const ModelConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

// Live chat-completions-shaped HTTP backend. The API key is read from the
// environment variable named in ModelConfig, never from configuration files.
class ApiBackend : public VisionBackend {
 public:
  BackendReply complete(const std::vector<unsigned char>& image_bytes,
                        const std::string& media_type, const std::string& prompt,
                        const ModelConfig& cfg) override;
  std::string name() const override { return "api"; }
};

// Deterministic stand-in: serves <sha256(image)>.txt from a fixture directory
// and appends a timestamped issue/done log for rate and concurrency audits.
class ReplayBackend : public VisionBackend {
 public:
  explicit ReplayBackend(std::filesystem::path fixtures_dir,
                         std::filesystem::path log_path = {}, double delay_s = 0.0);

  BackendReply complete(const std::vector<unsigned char>& image_bytes,
                        const std::string& media_type, const std::string& prompt,
                        const ModelConfig& cfg) override;
  std::string name() const override { return "replay"; }

  // Fixture authoring helper: response text for an image with this content.
  static std::filesystem::path fixture_path(const std::filesystem::path& fixtures_dir,
                                            const std::string& image_key);

  struct LogEntry {
    std::string event;  // "issue" | "done"
    std::string image_key;
    double t_ms = 0;    // since backend construction
    int in_flight = 0;
  };
  static std::vector<LogEntry> read_log(const std::filesystem::path& log_path);

 private:
  std::filesystem::path fixtures_dir_;
  std::filesystem::path log_path_;
  double delay_s_;
  std::mutex mutex_;
  int in_flight_ = 0;
  std::chrono::steady_clock::time_point epoch_;
};

// One request: prompt as a text part, image as a base64 data-URL part.
VisionExchange submit(const std::filesystem::path& image, const prompts::PromptText& prompt,
                      const ModelConfig& cfg, VisionBackend& backend,
                      const CostModel& cost = {});

// Spaces request issuance so that any 60 s window holds at most
// requests_per_minute issues (a slight margin absorbs scheduler jitter).
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute);
  void acquire();

 private:
  std::chrono::duration<double> interval_;
  std::mutex mutex_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

struct RunSummary {
  long pages = 0;
  long skipped = 0;   // already stored and clean
  long submitted = 0; // rows worked this invocation
  long ok = 0;        // terminal ok rows across the run
  long exhausted = 0;
  long tokens = 0;
  double cost_usd = 0;
};

// Drives every manifest row to a terminal state through `backend`, persisting
// each outcome in `store` under run_id. Stored rows that pass the bad-output
// screen are skipped; others are re-submitted up to max_attempts.
RunSummary run_batch(const std::vector<ingest::PageRecord>& manifest,
                     const prompts::PromptText& prompt, const BatchPolicy& policy,
                     const ModelConfig& cfg, const CostModel& cost, VisionBackend& backend,
                     store::PipelineStore& store, const std::string& run_id);

struct CostEstimate {
  double usd = 0;
  double serial_days = 0;
  double wall_days = 0;
  double papers_equivalent = 0;
};

CostEstimate estimate_cost(long n_images, const CostModel& model, int concurrency = 1);
long images_within_budget(double budget_usd, const CostModel& model);
long whole_papers(long n_images, const CostModel& model);

}  // namespace figmine::vision
