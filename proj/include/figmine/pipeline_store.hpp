#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace figmine::store {

struct RunRecord {
  std::string run_id;
  std::string prompt_version;
  std::string model_id;
  std::string backend;  // "api" | "replay"
  std::string started_at;
  std::string finished_at;
  long pages = 0;
  long ok = 0;
  long exhausted = 0;
  long tokens = 0;
  double cost_usd = 0;
};

// One durable record per (run, image). Raw text preserved byte-for-byte.
struct StoredRow {
  std::string image_key;  // content hash of the page image
  std::string img;        // image path as referenced by the manifest
  std::string doi;
  int page_number = 0;
  std::string text;
  std::string status;  // "ok" | "exhausted"
  int attempt_count = 0;
  long request_tokens = 0;
  long response_tokens = 0;
  double cost_usd = 0;
  std::string prompt_version;

  bool operator==(const StoredRow&) const = default;
};

// Bad-output screen shared by the batch runner and pending().
struct ScreenPolicy {
  std::vector<std::string> requeue_keywords = {"Error:", "upload the image", "analyze", "Sorry",
                                               "sorry"};
  std::vector<std::string> required_markers = {"Figures", "Nitrogen Isotherm"};
};

// True when the text is usable: nonempty beyond 5 characters after trimming,
// free of requeue keywords, and carrying at least one required marker.
bool screen_passes(std::string_view text, const ScreenPolicy& policy);

struct ManifestKey {
  std::string image_key;
  std::string img;
};

// Directory-backed store: runs/<run_id>/run.json plus one JSON file per row,
// written atomically (temp file + rename). Rows are deterministic; wall-clock
// timestamps live only in run.json.
class PipelineStore {
 public:
  explicit PipelineStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  void write_run_record(const RunRecord& record);
  std::optional<RunRecord> run_record(const std::string& run_id) const;
  std::vector<std::string> run_ids() const;

  // Durable before return; identical re-upserts leave the file untouched.
  void upsert(const std::string& run_id, const StoredRow& row);
  std::optional<StoredRow> get(const std::string& run_id, const std::string& image_key) const;
  std::vector<StoredRow> rows(const std::string& run_id) const;  // sorted by img

  // Manifest keys still needing work, in manifest order.
  std::vector<ManifestKey> pending(const std::string& run_id,
                                   const std::vector<ManifestKey>& manifest,
                                   const ScreenPolicy& policy) const;

  // Flat CSV mirror: img, text, GPT-4V Output, Nitrogen Isotherm, Compound,
  // Porosity, Hysteresis, Saturation, Position.
  void export_csv(const std::string& run_id, const std::filesystem::path& out) const;

 private:
  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path row_path(const std::string& run_id, const std::string& image_key) const;

  std::filesystem::path root_;
  mutable std::mutex write_mutex_;
};

// Content identity of a page image (hex digest); renames do not change it.
std::string image_key_for(const std::filesystem::path& image);

}  // namespace figmine::store
