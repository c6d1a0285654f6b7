#include "figmine/pipeline_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/hash.hpp"
#include "figmine/response_parser.hpp"

namespace figmine::store {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

json to_json(const StoredRow& row) {
  return json{{"image_key", row.image_key},
              {"img", row.img},
              {"doi", row.doi},
              {"page_number", row.page_number},
              {"text", row.text},
              {"status", row.status},
              {"attempt_count", row.attempt_count},
              {"request_tokens", row.request_tokens},
              {"response_tokens", row.response_tokens},
              {"cost_usd", row.cost_usd},
              {"prompt_version", row.prompt_version}};
}

StoredRow row_from_json(const json& j) {
  StoredRow row;
  row.image_key = j.value("image_key", "");
  row.img = j.value("img", "");
  row.doi = j.value("doi", "");
  row.page_number = j.value("page_number", 0);
  row.text = j.value("text", "");
  row.status = j.value("status", "");
  row.attempt_count = j.value("attempt_count", 0);
  row.request_tokens = j.value("request_tokens", 0L);
  row.response_tokens = j.value("response_tokens", 0L);
  row.cost_usd = j.value("cost_usd", 0.0);
  row.prompt_version = j.value("prompt_version", "");
  return row;
}

json to_json(const RunRecord& record) {
  return json{{"run_id", record.run_id},
              {"prompt_version", record.prompt_version},
              {"model_id", record.model_id},
              {"backend", record.backend},
              {"started_at", record.started_at},
              {"finished_at", record.finished_at},
              {"pages", record.pages},
              {"ok", record.ok},
              {"exhausted", record.exhausted},
              {"tokens", record.tokens},
              {"cost_usd", record.cost_usd}};
}

RunRecord run_from_json(const json& j) {
  RunRecord record;
  record.run_id = j.value("run_id", "");
  record.prompt_version = j.value("prompt_version", "");
  record.model_id = j.value("model_id", "");
  record.backend = j.value("backend", "");
  record.started_at = j.value("started_at", "");
  record.finished_at = j.value("finished_at", "");
  record.pages = j.value("pages", 0L);
  record.ok = j.value("ok", 0L);
  record.exhausted = j.value("exhausted", 0L);
  record.tokens = j.value("tokens", 0L);
  record.cost_usd = j.value("cost_usd", 0.0);
  return record;
}

// Durable write: temp file in the same directory, fsync, rename over target.
void write_atomic(const std::filesystem::path& target, const std::string& content) {
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("store: cannot create " + tmp.string());
  size_t written = 0;
  while (written < content.size()) {
    ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      ::close(fd);
      ::unlink(tmp.c_str());
      throw IoError("store: write failed for " + tmp.string());
    }
    written += static_cast<size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw IoError("store: fsync failed for " + tmp.string());
  }
  ::close(fd);
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("store: rename failed for " + target.string() + ": " + ec.message());
}

std::optional<std::string> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

bool screen_passes(std::string_view text, const ScreenPolicy& policy) {
  std::string trimmed = trim(text);
  if (trimmed.size() <= 5) return false;
  for (const auto& keyword : policy.requeue_keywords) {
    if (!keyword.empty() && text.find(keyword) != std::string_view::npos) return false;
  }
  if (!policy.required_markers.empty()) {
    bool any_marker = false;
    for (const auto& marker : policy.required_markers) {
      if (text.find(marker) != std::string_view::npos) {
        any_marker = true;
        break;
      }
    }
    if (!any_marker) return false;
  }
  return true;
}

PipelineStore::PipelineStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "runs", ec);
  if (ec) throw IoError("store: cannot create " + (root_ / "runs").string());
}

std::filesystem::path PipelineStore::run_dir(const std::string& run_id) const {
  if (run_id.empty() || run_id.find('/') != std::string::npos) {
    throw UsageError("store: invalid run id '" + run_id + "'");
  }
  return root_ / "runs" / run_id;
}

std::filesystem::path PipelineStore::row_path(const std::string& run_id,
                                              const std::string& image_key) const {
  return run_dir(run_id) / "rows" / (image_key + ".json");
}

void PipelineStore::write_run_record(const RunRecord& record) {
  std::lock_guard lock(write_mutex_);
  std::filesystem::path dir = run_dir(record.run_id);
  std::error_code ec;
  std::filesystem::create_directories(dir / "rows", ec);
  if (ec) throw IoError("store: cannot create " + dir.string());
  write_atomic(dir / "run.json", to_json(record).dump(2) + "\n");
}

std::optional<RunRecord> PipelineStore::run_record(const std::string& run_id) const {
  auto content = read_all(run_dir(run_id) / "run.json");
  if (!content) return std::nullopt;
  try {
    return run_from_json(json::parse(*content));
  } catch (const json::exception& e) {
    throw ValidationError("store: corrupt run.json for " + run_id + ": " + e.what());
  }
}

std::vector<std::string> PipelineStore::run_ids() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(root_ / "runs", ec)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void PipelineStore::upsert(const std::string& run_id, const StoredRow& row) {
  if (row.image_key.empty()) throw UsageError("store: row without image key");
  std::lock_guard lock(write_mutex_);
  std::filesystem::path path = row_path(run_id, row.image_key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("store: cannot create " + path.parent_path().string());
  std::string content = to_json(row).dump(2) + "\n";
  if (auto existing = read_all(path); existing && *existing == content) return;  // no-op
  write_atomic(path, content);
}

std::optional<StoredRow> PipelineStore::get(const std::string& run_id,
                                            const std::string& image_key) const {
  auto content = read_all(row_path(run_id, image_key));
  if (!content) return std::nullopt;
  try {
    return row_from_json(json::parse(*content));
  } catch (const json::exception& e) {
    throw ValidationError("store: corrupt row " + image_key + " in run " + run_id + ": " +
                          e.what());
  }
}

std::vector<StoredRow> PipelineStore::rows(const std::string& run_id) const {
  std::vector<StoredRow> out;
  std::error_code ec;
  std::filesystem::path dir = run_dir(run_id) / "rows";
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    auto content = read_all(entry.path());
    if (!content) continue;
    try {
      out.push_back(row_from_json(json::parse(*content)));
    } catch (const json::exception& e) {
      throw ValidationError("store: corrupt row file " + entry.path().string() + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const StoredRow& a, const StoredRow& b) {
    return std::tie(a.img, a.image_key) < std::tie(b.img, b.image_key);
  });
  return out;
}

std::vector<ManifestKey> PipelineStore::pending(const std::string& run_id,
                                                const std::vector<ManifestKey>& manifest,
                                                const ScreenPolicy& policy) const {
  std::vector<ManifestKey> out;
  for (const ManifestKey& key : manifest) {
    auto row = get(run_id, key.image_key);
    if (!row || !screen_passes(row->text, policy)) out.push_back(key);
  }
  return out;
}

void PipelineStore::export_csv(const std::string& run_id, const std::filesystem::path& out) const {
  csv::Table table;
  table.header = {"img",       "text",     "GPT-4V Output", "Nitrogen Isotherm", "Compound",
                  "Porosity", "Hysteresis", "Saturation",   "Position"};
  for (const StoredRow& row : rows(run_id)) {
    parser::LabelSet labels = parser::parse_label_set(row.text);
    auto fields = parser::cleaned_descriptor_fields(row.text);
    std::map<std::string, std::string> by_key(fields.begin(), fields.end());
    table.rows.push_back({row.img, row.text, labels.joined(), by_key["Nitrogen Isotherm"],
                          by_key["Compound"], by_key["Porosity"], by_key["Hysteresis"],
                          by_key["Saturation"], by_key["Position"]});
  }
  csv::write_file(out, table);
}

std::string image_key_for(const std::filesystem::path& image) { return sha256_file_hex(image); }

}  // namespace figmine::store
