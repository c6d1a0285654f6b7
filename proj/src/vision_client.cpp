#include "figmine/vision_client.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/hash.hpp"
#include "figmine/png_codec.hpp"

namespace figmine::vision {

namespace {

using nlohmann::json;

constexpr size_t kMaxImageBytes = 20 * 1024 * 1024;

std::string base64_encode(std::span<const unsigned char> data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= data.size()) {
    uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  size_t rest = data.size() - i;
  if (rest == 1) {
    uint32_t v = data[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, possibly empty
};

UrlParts split_url(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("vision: base_url lacks scheme: " + url);
  }
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

std::vector<unsigned char> read_image_bytes(const std::filesystem::path& image) {
  std::ifstream in(image, std::ios::binary);
  if (!in) throw IoError("vision: cannot open image " + image.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() > kMaxImageBytes) {
    throw ValidationError("vision: image exceeds " + std::to_string(kMaxImageBytes) +
                          " bytes: " + image.string());
  }
  // pre-flight: must decode as an image we can ship
  if (!png::looks_like_png(bytes)) {
    throw ValidationError("vision: image is not a PNG: " + image.string());
  }
  png::read_info(bytes);
  return bytes;
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

}  // namespace

double Backoff::delay_for_attempt(int attempt) const {
  double delay = initial_s * std::pow(multiplier, std::max(0, attempt - 1));
  return std::min(delay, cap_s);
}

const char* to_string(ExchangeStatus status) {
  switch (status) {
    case ExchangeStatus::ok: return "ok";
    case ExchangeStatus::transport_error: return "transport_error";
    case ExchangeStatus::bad_output: return "bad_output";
    case ExchangeStatus::exhausted: return "exhausted";
  }
  return "?";
}

// ------------------------------------------------------------- ApiBackend

BackendReply ApiBackend::complete(const std::vector<unsigned char>& image_bytes,
                                  const std::string& media_type, const std::string& prompt,
                                  const ModelConfig& cfg) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (!key || !*key) {
    throw BackendError("vision: API key not found in environment variable " + cfg.api_key_env);
  }

  json payload = {
      {"model", cfg.model_id},
      {"messages",
       {{{"role", "user"},
         {"content",
          {{{"type", "text"}, {"text", prompt}},
           {{"type", "image_url"},
            {"image_url",
             {{"url", "data:" + media_type + ";base64," + base64_encode(image_bytes)}}}}}}}}},
      {"max_tokens", cfg.max_tokens},
  };

  UrlParts url = split_url(cfg.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
  client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
  client.set_write_timeout(std::chrono::duration<double>(cfg.timeout_s));
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  auto res = client.Post(url.prefix + "/chat/completions", headers, payload.dump(),
                         "application/json");
  BackendReply reply;
  if (!res) {
    reply.transport_ok = false;
    reply.error = httplib::to_string(res.error());
    return reply;
  }
  reply.transport_ok = true;
  reply.http_status = res->status;
  if (res->status < 200 || res->status >= 300) {
    reply.error = "http status " + std::to_string(res->status);
    return reply;
  }
  try {
    json body = json::parse(res->body);
    if (body.contains("choices") && !body["choices"].empty()) {
      const auto& message = body["choices"][0]["message"];
      if (message.contains("content") && message["content"].is_string()) {
        reply.text = message["content"].get<std::string>();
      }
    }
    if (body.contains("usage")) {
      reply.prompt_tokens = body["usage"].value("prompt_tokens", -1L);
      reply.completion_tokens = body["usage"].value("completion_tokens", -1L);
    }
  } catch (const json::exception&) {
    reply.text.clear();  // unparseable body: empty text, screened as bad output
  }
  return reply;
}

// ----------------------------------------------------------- ReplayBackend

ReplayBackend::ReplayBackend(std::filesystem::path fixtures_dir, std::filesystem::path log_path,
                             double delay_s)
    : fixtures_dir_(std::move(fixtures_dir)),
      log_path_(std::move(log_path)),
      delay_s_(delay_s),
      epoch_(std::chrono::steady_clock::now()) {
  if (!std::filesystem::is_directory(fixtures_dir_)) {
    throw IoError("replay: fixture directory not found: " + fixtures_dir_.string());
  }
  if (!log_path_.empty()) {
    std::ofstream out(log_path_, std::ios::trunc);
    out << "event,image_key,t_ms,in_flight\n";
  }
}

std::filesystem::path ReplayBackend::fixture_path(const std::filesystem::path& fixtures_dir,
                                                  const std::string& image_key) {
  return fixtures_dir / (image_key + ".txt");
}

BackendReply ReplayBackend::complete(const std::vector<unsigned char>& image_bytes,
                                     const std::string&, const std::string&,
                                     const ModelConfig&) {
  std::string key = sha256_hex(std::span<const unsigned char>(image_bytes));

  auto log = [&](const char* event, int in_flight) {
    if (log_path_.empty()) return;
    double t_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            epoch_)
                      .count();
    std::ofstream out(log_path_, std::ios::app);
    out << event << "," << key << "," << t_ms << "," << in_flight << "\n";
  };

  {
    std::lock_guard lock(mutex_);
    ++in_flight_;
    log("issue", in_flight_);
  }
  if (delay_s_ > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(delay_s_));
  }

  BackendReply reply;
  reply.transport_ok = true;
  std::ifstream in(fixture_path(fixtures_dir_, key), std::ios::binary);
  if (!in) {
    reply.http_status = 404;
    reply.error = "no replay fixture for image " + key;
  } else {
    std::ostringstream buf;
    buf << in.rdbuf();
    reply.http_status = 200;
    reply.text = buf.str();
  }

  {
    std::lock_guard lock(mutex_);
    log("done", in_flight_);
    --in_flight_;
  }
  return reply;
}

std::vector<ReplayBackend::LogEntry> ReplayBackend::read_log(
    const std::filesystem::path& log_path) {
  csv::Table table = csv::read_file(log_path);
  std::vector<LogEntry> entries;
  for (const auto& row : table.rows) {
    if (row.size() < 4) continue;
    LogEntry e;
    e.event = row[0];
    e.image_key = row[1];
    e.t_ms = std::strtod(row[2].c_str(), nullptr);
    e.in_flight = std::atoi(row[3].c_str());
    entries.push_back(std::move(e));
  }
  return entries;
}

// ------------------------------------------------------------------ submit

VisionExchange submit(const std::filesystem::path& image, const prompts::PromptText& prompt,
                      const ModelConfig& cfg, VisionBackend& backend, const CostModel& cost) {
  if (cfg.max_tokens < 1) throw UsageError("vision: max_tokens must be >= 1");
  auto bytes = read_image_bytes(image);

  VisionExchange exchange;
  exchange.image_ref = image.string();
  exchange.prompt_version = prompt.version;
  exchange.attempt_count = 1;

  auto t0 = std::chrono::steady_clock::now();
  BackendReply reply = backend.complete(bytes, "image/png", prompt.body, cfg);
  exchange.latency_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!reply.transport_ok || reply.http_status < 200 || reply.http_status >= 300) {
    exchange.status = ExchangeStatus::transport_error;
    return exchange;
  }
  // a completed request is a billed request
  exchange.cost_usd = cost.usd_per_image;
  if (reply.prompt_tokens >= 0) exchange.request_tokens = reply.prompt_tokens;
  if (reply.completion_tokens >= 0) exchange.response_tokens = reply.completion_tokens;
  exchange.raw_text = reply.text;
  exchange.status = reply.text.empty() ? ExchangeStatus::bad_output : ExchangeStatus::ok;
  return exchange;
}

// -------------------------------------------------------------- RateLimiter

RateLimiter::RateLimiter(double per_minute) {
  if (per_minute <= 0) throw UsageError("vision: requests_per_minute must be positive");
  // 0.1% margin keeps any 60 s window at or under the configured rate even
  // with scheduler wake-up jitter
  interval_ = std::chrono::duration<double>(60.0 / per_minute * 1.001);
}

void RateLimiter::acquire() {
  std::lock_guard lock(mutex_);
  if (last_) {
    std::this_thread::sleep_until(*last_ + std::chrono::duration_cast<
                                               std::chrono::steady_clock::duration>(interval_));
  }
  last_ = std::chrono::steady_clock::now();
}

// ---------------------------------------------------------------- run_batch

RunSummary run_batch(const std::vector<ingest::PageRecord>& manifest,
                     const prompts::PromptText& prompt, const BatchPolicy& policy,
                     const ModelConfig& cfg, const CostModel& cost, VisionBackend& backend,
                     store::PipelineStore& store, const std::string& run_id) {
  if (policy.concurrency < 1) throw UsageError("vision: concurrency must be >= 1");
  if (policy.max_attempts < 1) throw UsageError("vision: max_attempts must be >= 1");

  store::RunRecord record;
  if (auto existing = store.run_record(run_id)) record = *existing;
  record.run_id = run_id;
  record.prompt_version = prompt.version;
  record.model_id = cfg.model_id;
  record.backend = backend.name();
  if (record.started_at.empty()) record.started_at = now_iso8601();
  record.finished_at.clear();
  record.pages = static_cast<long>(manifest.size());
  store.write_run_record(record);

  struct WorkItem {
    const ingest::PageRecord* page;
    std::string image_key;
  };
  std::vector<store::ManifestKey> keys;
  std::vector<WorkItem> by_key;
  keys.reserve(manifest.size());
  for (const auto& page : manifest) {
    std::string key = store::image_key_for(page.image_path);
    keys.push_back({key, page.image_path.string()});
    by_key.push_back({&page, key});
  }
  auto pending_keys = store.pending(run_id, keys, policy.screen);

  std::vector<WorkItem> work;
  for (const auto& pending : pending_keys) {
    for (const auto& item : by_key) {
      if (item.image_key == pending.image_key && item.page->image_path.string() == pending.img) {
        work.push_back(item);
        break;
      }
    }
  }

  RunSummary summary;
  summary.pages = static_cast<long>(manifest.size());
  summary.skipped = static_cast<long>(manifest.size() - work.size());
  summary.submitted = static_cast<long>(work.size());

  RateLimiter limiter(policy.requests_per_minute);
  std::atomic<size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex failure_mutex;
  std::exception_ptr store_failure;

  auto worker = [&] {
    while (!abort.load()) {
      size_t index = next.fetch_add(1);
      if (index >= work.size()) break;
      const WorkItem& item = work[index];

      store::StoredRow row;
      row.image_key = item.image_key;
      row.img = item.page->image_path.string();
      row.doi = item.page->doi;
      row.page_number = item.page->page_number;
      row.prompt_version = prompt.version;

      std::string last_text;
      bool ok = false;
      int attempts = 0;
      try {
        std::vector<unsigned char> bytes = read_image_bytes(item.page->image_path);
        for (int attempt = 1; attempt <= policy.max_attempts && !abort.load(); ++attempt) {
          attempts = attempt;
          limiter.acquire();
          BackendReply reply = backend.complete(bytes, "image/png", prompt.body, cfg);
          bool responded = reply.transport_ok && reply.http_status >= 200 &&
                           reply.http_status < 300;
          if (responded) {
            row.cost_usd += cost.usd_per_image;
            if (reply.prompt_tokens > 0) row.request_tokens += reply.prompt_tokens;
            if (reply.completion_tokens > 0) row.response_tokens += reply.completion_tokens;
            last_text = reply.text;
            if (store::screen_passes(last_text, policy.screen)) {
              ok = true;
              break;
            }
          }
          if (attempt < policy.max_attempts) {
            double delay = policy.backoff.delay_for_attempt(attempt);
            if (delay > 0) {
              std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
          }
        }
      } catch (const Error&) {
        // unreadable/undecodable image: the row stays exhausted with no text
      }

      row.text = last_text;
      row.attempt_count = attempts;
      row.status = ok ? "ok" : "exhausted";
      try {
        store.upsert(run_id, row);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!store_failure) store_failure = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  int n_threads = std::min<int>(policy.concurrency, std::max<size_t>(work.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // totals over the whole run state, not just this invocation
  long tokens = 0;
  double total_cost = 0;
  long ok_rows = 0, exhausted_rows = 0;
  for (const auto& row : store.rows(run_id)) {
    tokens += row.request_tokens + row.response_tokens;
    total_cost += row.cost_usd;
    if (row.status == "ok") ++ok_rows;
    if (row.status == "exhausted") ++exhausted_rows;
  }
  summary.ok = ok_rows;
  summary.exhausted = exhausted_rows;
  summary.tokens = tokens;
  summary.cost_usd = total_cost;

  record.ok = ok_rows;
  record.exhausted = exhausted_rows;
  record.tokens = tokens;
  record.cost_usd = total_cost;
  record.finished_at = now_iso8601();
  store.write_run_record(record);

  if (store_failure) std::rethrow_exception(store_failure);
  return summary;
}

// -------------------------------------------------------------- estimation

CostEstimate estimate_cost(long n_images, const CostModel& model, int concurrency) {
  if (n_images < 0) throw UsageError("cost: image count must be >= 0");
  if (concurrency < 1) throw UsageError("cost: concurrency must be >= 1");
  if (model.usd_per_image <= 0 || model.seconds_per_request <= 0 || model.pages_per_paper <= 0) {
    throw UsageError("cost: model parameters must be positive");
  }
  CostEstimate estimate;
  estimate.usd = static_cast<double>(n_images) * model.usd_per_image;
  estimate.serial_days = static_cast<double>(n_images) * model.seconds_per_request / 86400.0;
  estimate.wall_days = estimate.serial_days / concurrency;
  estimate.papers_equivalent = static_cast<double>(n_images) / model.pages_per_paper;
  return estimate;
}

long images_within_budget(double budget_usd, const CostModel& model) {
  if (budget_usd < 0) throw UsageError("cost: budget must be >= 0");
  if (model.usd_per_image <= 0) throw UsageError("cost: usd_per_image must be positive");
  return static_cast<long>(std::floor(budget_usd / model.usd_per_image + 1e-9));
}

long whole_papers(long n_images, const CostModel& model) {
  if (model.pages_per_paper <= 0) throw UsageError("cost: pages_per_paper must be positive");
  return static_cast<long>(std::floor(static_cast<double>(n_images) / model.pages_per_paper + 1e-9));
}

}  // namespace figmine::vision
