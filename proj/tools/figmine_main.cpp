#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "figmine/config.hpp"
#include "figmine/corpus_ingest.hpp"
#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/eval_harness.hpp"
#include "figmine/isotherm_analytics.hpp"
#include "figmine/pipeline_store.hpp"
#include "figmine/porosity_compare.hpp"
#include "figmine/prompt_kit.hpp"
#include "figmine/report.hpp"
#include "figmine/response_parser.hpp"
#include "figmine/vision_client.hpp"

namespace {

namespace fs = std::filesystem;
using figmine::Error;
using figmine::ErrorKind;
using figmine::IoError;
using figmine::UsageError;
using figmine::ValidationError;
namespace fm = figmine;

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
    case ErrorKind::backend: return "backend";
    case ErrorKind::validation: return "validation";
  }
  return "error";
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << "figmine: error: " << message << "\n";
  nlohmann::json diag = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << diag.dump() << "\n";
}

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

fm::config::Config load_config(const std::vector<std::string>& args) {
  for (size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") return fm::config::load_file(args[i + 1]);
  }
  return {};
}

fm::prompts::PromptText resolve_prompt(fm::prompts::PromptKind kind,
                                       const std::string& prompt_file) {
  if (prompt_file.empty()) {
    return kind == fm::prompts::PromptKind::classification
               ? fm::prompts::build_classification_prompt()
               : fm::prompts::build_extraction_prompt();
  }
  std::ifstream in(prompt_file, std::ios::binary);
  if (!in) throw IoError("prompt: cannot open " + prompt_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  return {kind, buf.str(), "file:" + fs::path(prompt_file).filename().string()};
}

std::string pick_run_id(fm::store::PipelineStore& store, std::string requested) {
  if (!requested.empty()) return requested;
  auto ids = store.run_ids();
  if (ids.size() == 1) return ids.front();
  if (ids.empty()) throw ValidationError("store has no runs");
  throw UsageError("store has multiple runs; pass --run-id (one of: " +
                   [&] {
                     std::string joined;
                     for (const auto& id : ids) joined += (joined.empty() ? "" : ", ") + id;
                     return joined;
                   }());
}

// ------------------------------------------------------------- subcommands

int cmd_ingest(const std::string& corpus, int dpi, const std::string& out,
               std::vector<std::string> si_suffixes) {
  fm::ingest::IngestOptions opts;
  opts.raster.dpi = dpi;
  if (!si_suffixes.empty()) opts.si_suffixes = std::move(si_suffixes);
  auto result = fm::ingest::ingest_corpus(corpus, opts);
  for (const auto& error : result.errors) std::cerr << "figmine: warning: " << error << "\n";
  fm::ingest::build_manifest(result.records, out);

  long main_pages = 0, si_pages = 0;
  for (const auto& rec : result.records) {
    (rec.source_kind == fm::ingest::SourceKind::supporting ? si_pages : main_pages)++;
  }
  std::cout << "pages " << result.records.size() << "\n"
            << "main " << main_pages << "\n"
            << "supporting " << si_pages << "\n"
            << "failed_pdfs " << result.errors.size() << "\n"
            << "manifest " << out << "\n";
  return 0;
}

int cmd_prompt(const std::string& kind_name, const std::string& prompt_file) {
  auto kind = fm::prompts::prompt_kind_from_string(kind_name);
  auto prompt = resolve_prompt(kind, prompt_file);
  std::cout << prompt.body;
  return 0;
}

struct BatchArgs {
  std::string manifest;
  std::string corpus;
  std::string backend = "replay";
  std::string fixtures;
  std::string store_dir = "figmine_store";
  std::string run_id;
  std::string prompt_kind = "extraction";  // classify defaults to the full prompt
  std::string prompt_file;
  std::string replay_log;
  fm::config::Config cfg;
};

int cmd_batch(const std::string& default_run_id, BatchArgs& args) {
  fs::path manifest_path = args.manifest;
  fs::path corpus = args.corpus.empty() ? manifest_path.parent_path() : fs::path(args.corpus);
  auto records = fm::ingest::read_manifest(manifest_path, corpus);
  if (records.empty()) throw UsageError("manifest has no rows: " + args.manifest);

  auto prompt = resolve_prompt(fm::prompts::prompt_kind_from_string(args.prompt_kind),
                               args.prompt_file);
  if (args.run_id.empty()) args.run_id = default_run_id;

  fm::store::PipelineStore store(args.store_dir);
  std::unique_ptr<fm::vision::VisionBackend> backend;
  if (args.backend == "api") {
    backend = std::make_unique<fm::vision::ApiBackend>();
  } else if (args.backend == "replay") {
    if (args.fixtures.empty()) throw UsageError("replay backend needs --fixtures");
    fs::path log = args.replay_log.empty()
                       ? fs::path(args.store_dir) / (args.run_id + "_replay_log.csv")
                       : fs::path(args.replay_log);
    backend = std::make_unique<fm::vision::ReplayBackend>(args.fixtures, log);
  } else {
    throw UsageError("unknown backend '" + args.backend + "' (expected api|replay)");
  }

  auto summary = fm::vision::run_batch(records, prompt, args.cfg.batch, args.cfg.api,
                                       args.cfg.cost, *backend, store, args.run_id);
  std::cout << "run_id " << args.run_id << "\n"
            << "pages " << summary.pages << "\n"
            << "skipped " << summary.skipped << "\n"
            << "submitted " << summary.submitted << "\n"
            << "ok " << summary.ok << "\n"
            << "exhausted " << summary.exhausted << "\n"
            << "tokens " << summary.tokens << "\n"
            << "cost_usd " << fmt("%.2f", summary.cost_usd) << "\n";
  return summary.exhausted > 0 ? 3 : 0;
}

int cmd_parse(const std::string& store_dir, const std::string& run_id_arg, const std::string& out,
              const std::string& export_raw) {
  fm::store::PipelineStore store(store_dir);
  std::string run_id = pick_run_id(store, run_id_arg);
  if (!store.run_record(run_id)) throw ValidationError("no run '" + run_id + "' in " + store_dir);

  fm::csv::Table table;
  table.header = fm::parser::parsed_csv_header();
  for (const auto& row : store.rows(run_id)) {
    auto labels = fm::parser::parse_label_set(row.text);
    auto extraction = fm::parser::parse_extraction(row.text);
    table.rows.push_back(fm::parser::to_parsed_row(row.img, labels, extraction));
  }
  fm::csv::write_file(out, table);
  if (!export_raw.empty()) store.export_csv(run_id, export_raw);
  std::cout << "rows " << table.rows.size() << "\n" << "parsed " << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred, const std::string& truth, const std::string& report_dir,
                 const fm::config::Config& cfg) {
  auto rows = fm::report::join_pred_truth(pred, truth);
  fm::report::ReportOptions options;
  options.comparator.iou_threshold = cfg.analysis.iou_threshold;
  auto written = fm::report::write_report_bundle(rows, options, report_dir);
  auto metrics = fm::eval::aggregate(fm::report::label_pairs(rows));
  std::cout << fm::report::render_metrics_table(metrics);
  std::cout << "report_dir " << report_dir << "\n";
  for (const auto& name : written) std::cout << "wrote " << name << "\n";
  return 0;
}

int cmd_analyze(const std::string& points, const std::string& bet_range_text,
                const std::string& out, const fm::config::Config& cfg) {
  fm::config::Config local = cfg;
  if (!bet_range_text.empty()) {
    fm::config::apply(local, "analysis.bet_range", bet_range_text);
  }
  auto curve = fm::isotherm::load_curve(points);
  auto result = fm::isotherm::bet_surface_area(curve, local.analysis.bet_range);

  nlohmann::json j;
  j["compound"] = curve.compound;
  j["v_monolayer"] = result.v_monolayer;
  j["bet_c"] = std::isfinite(result.bet_c) ? nlohmann::json(result.bet_c) : nlohmann::json();
  j["surface_area"] = result.surface_area;
  j["fit_r2"] = result.fit_r2;
  j["points_used"] = result.points_used;
  try {
    j["pore_volume"] = fm::isotherm::pore_volume(curve);
  } catch (const Error&) {
    j["pore_volume"] = nullptr;  // branch does not span the evaluation pressure
  }
  try {
    auto plateau = fm::isotherm::detect_plateau(curve, local.analysis.slope_eps);
    j["plateau"] = plateau ? nlohmann::json{{"lo", plateau->lo}, {"hi", plateau->hi}}
                           : nlohmann::json();
  } catch (const Error&) {
    j["plateau"] = nullptr;
  }
  j["hysteresis"] = fm::parser::to_string(
      fm::isotherm::detect_hysteresis(curve, local.analysis.gap_tol));

  std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out);
    f << text;
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& extracted, const std::string& db_path, const std::string& map_path,
                const std::string& out_dir) {
  auto db = fm::compare::ComputedDb::load(db_path);
  std::vector<std::string> unmapped;
  fs::path mapping = map_path;
  auto experimental = fm::compare::load_experimental(
      extracted, map_path.empty() ? nullptr : &mapping, &unmapped);
  auto result = fm::compare::run_compare(experimental, db);
  if (result.rows.empty()) throw ValidationError("no refcodes matched the computed db");

  fs::create_directories(out_dir);
  fm::compare::emit_scatter(result.rows, out_dir);
  std::string table = fm::compare::render_comparison_table(result.rows);
  {
    std::ofstream f(fs::path(out_dir) / "comparison_table.txt", std::ios::binary | std::ios::trunc);
    f << table;
  }
  for (const auto& refcode : result.unmatched) unmapped.push_back(refcode);
  if (!unmapped.empty()) {
    std::ofstream f(fs::path(out_dir) / "unmatched.txt", std::ios::binary | std::ios::trunc);
    for (const auto& item : unmapped) f << item << "\n";
  }
  std::cout << table;
  std::cout << "compared " << result.rows.size() << "\n"
            << "unmatched " << unmapped.size() << "\n"
            << "out_dir " << out_dir << "\n";
  return 0;
}

int cmd_cost(std::optional<long> images, std::optional<double> budget, int concurrency,
             const fm::config::Config& cfg) {
  if (!images && !budget) throw UsageError("cost: pass --images or --budget");
  if (budget) {
    long n = fm::vision::images_within_budget(*budget, cfg.cost);
    long papers = fm::vision::whole_papers(n, cfg.cost);
    std::cout << "budget_usd " << fmt("%.2f", *budget) << "\n"
              << "images " << n << "\n"
              << "papers " << papers << "\n";
    return 0;
  }
  auto estimate = fm::vision::estimate_cost(*images, cfg.cost, concurrency);
  std::cout << "images " << *images << "\n"
            << "usd " << fmt("%.2f", estimate.usd) << "\n"
            << "serial_days " << fmt("%.4f", estimate.serial_days) << "\n"
            << "wall_days " << fmt("%.4f", estimate.wall_days) << "\n"
            << "papers_equivalent " << fmt("%.2f", estimate.papers_equivalent) << "\n";
  return 0;
}

int cmd_report(const std::string& store_dir, const std::string& run_id_arg,
               const std::string& truth, const std::string& out_dir, const std::string& extracted,
               const std::string& db_path, const std::string& map_path,
               const std::vector<std::string>& curves, const fm::config::Config& cfg) {
  fm::store::PipelineStore store(store_dir);
  std::string run_id = pick_run_id(store, run_id_arg);
  if (!store.run_record(run_id)) throw ValidationError("no run '" + run_id + "' in " + store_dir);
  auto stored = store.rows(run_id);
  if (stored.empty()) throw ValidationError("run '" + run_id + "' has no stored rows");

  std::vector<fm::parser::ParsedRow> preds;
  preds.reserve(stored.size());
  for (const auto& row : stored) {
    fm::parser::ParsedRow parsed;
    parsed.img = row.img;
    parsed.labels = fm::parser::parse_label_set(row.text);
    parsed.extraction = fm::parser::parse_extraction(row.text);
    parsed.has_extraction = true;
    preds.push_back(std::move(parsed));
  }
  auto rows = fm::report::join_rows(preds, fm::report::load_parsed_csv(truth));

  fm::report::ReportOptions options;
  options.comparator.iou_threshold = cfg.analysis.iou_threshold;
  if (!extracted.empty()) options.extracted = extracted;
  if (!db_path.empty()) options.computed_db = db_path;
  if (!map_path.empty()) options.mapping = map_path;
  for (const auto& curve : curves) options.curves.push_back(curve);

  auto written = fm::report::write_report_bundle(rows, options, out_dir);
  std::cout << "report_dir " << out_dir << "\n";
  for (const auto& name : written) std::cout << "wrote " << name << "\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"figmine: vision-LLM literature mining pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value configuration file");

  std::vector<std::string> raw_args(argv + 1, argv + argc);
  fm::config::Config cfg = load_config(raw_args);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "rasterize a PDF corpus and write the manifest");
  std::string corpus_dir, manifest_out;
  int dpi = 300;
  std::vector<std::string> si_suffixes;
  ingest->add_option("--corpus", corpus_dir, "corpus directory")->required();
  ingest->add_option("--dpi", dpi, "raster resolution (default 300)");
  ingest->add_option("--out", manifest_out, "manifest CSV path")->required();
  ingest->add_option("--si-suffix", si_suffixes, "supporting-information filename suffix");

  // prompt
  auto* prompt = app.add_subcommand("prompt", "print a canonical prompt");
  std::string prompt_kind = "extraction", prompt_file;
  prompt->add_option("--kind", prompt_kind, "classification|extraction");
  prompt->add_option("--prompt-file", prompt_file, "override with a prompt file");

  // classify / extract
  BatchArgs batch;
  auto add_batch_options = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", batch.manifest, "manifest CSV")->required();
    cmd->add_option("--corpus", batch.corpus, "corpus root (default: manifest directory)");
    cmd->add_option("--backend", batch.backend, "api|replay")->required();
    cmd->add_option("--fixtures", batch.fixtures, "replay fixture directory");
    cmd->add_option("--store", batch.store_dir, "record store directory");
    cmd->add_option("--run-id", batch.run_id, "run identifier");
    cmd->add_option("--prompt-file", batch.prompt_file, "override prompt body");
    cmd->add_option("--replay-log", batch.replay_log, "replay backend log path");
    cmd->add_option("--concurrency", cfg.batch.concurrency, "worker pool size");
    cmd->add_option("--rate", cfg.batch.requests_per_minute, "requests per minute");
    cmd->add_option("--max-attempts", cfg.batch.max_attempts, "attempts per page");
    cmd->add_option("--backoff-initial", cfg.batch.backoff.initial_s, "initial retry delay (s)");
    cmd->add_option("--max-tokens", cfg.api.max_tokens, "completion token cap");
    cmd->add_option("--model", cfg.api.model_id, "model identifier");
    cmd->add_option("--base-url", cfg.api.base_url, "API base URL");
  };
  auto* classify = app.add_subcommand("classify", "label pages with the vision model");
  add_batch_options(classify);
  classify->add_option("--prompt-kind", batch.prompt_kind,
                       "classification|extraction (default: the full extraction prompt)");
  auto* extract = app.add_subcommand("extract", "extract isotherm descriptors from pages");
  add_batch_options(extract);

  // parse
  auto* parse = app.add_subcommand("parse", "parse stored responses into records");
  std::string parse_store, parse_run, parse_out, parse_export;
  parse->add_option("--responses", parse_store, "record store directory")->required();
  parse->add_option("--run-id", parse_run, "run identifier");
  parse->add_option("--out", parse_out, "parsed CSV path")->required();
  parse->add_option("--export-raw", parse_export, "also write the flat response CSV");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  std::string eval_pred, eval_truth, eval_report;
  evaluate->add_option("--pred", eval_pred, "parsed prediction CSV")->required();
  evaluate->add_option("--truth", eval_truth, "ground-truth CSV")->required();
  evaluate->add_option("--report", eval_report, "report output directory")->required();
  evaluate->add_option("--iou-threshold", cfg.analysis.iou_threshold, "box match threshold");

  // analyze-isotherm
  auto* analyze = app.add_subcommand("analyze-isotherm", "BET, plateau and hysteresis analytics");
  std::string points_file, bet_range_text, analyze_out;
  analyze->add_option("--points", points_file, "curve point CSV")->required();
  analyze->add_option("--bet-range", bet_range_text, "fit range lo:hi (default 0.05:0.30)");
  analyze->add_option("--out", analyze_out, "write JSON here instead of stdout");
  analyze->add_option("--slope-eps", cfg.analysis.slope_eps, "plateau slope tolerance");
  analyze->add_option("--gap-tol", cfg.analysis.gap_tol, "hysteresis gap tolerance");

  // compare
  auto* compare = app.add_subcommand("compare", "join experimental and computed porosity");
  std::string cmp_extracted, cmp_db, cmp_map, cmp_out;
  compare->add_option("--extracted", cmp_extracted, "experimental porosity CSV")->required();
  compare->add_option("--db", cmp_db, "computed-properties CSV")->required();
  compare->add_option("--map", cmp_map, "doi+compound -> refcode mapping CSV");
  compare->add_option("--out", cmp_out, "output directory")->required();

  // cost
  auto* cost = app.add_subcommand("cost", "throughput and cost arithmetic");
  std::optional<long> cost_images;
  std::optional<double> cost_budget;
  int cost_concurrency = 1;
  cost->add_option("--images", cost_images, "number of page images");
  cost->add_option("--budget", cost_budget, "budget in USD");
  cost->add_option("--concurrency", cost_concurrency, "parallel request streams");

  // report
  auto* report = app.add_subcommand("report", "emit the full report bundle for a run");
  std::string rep_store, rep_run, rep_truth, rep_out, rep_extracted, rep_db, rep_map;
  std::vector<std::string> rep_curves;
  report->add_option("--store", rep_store, "record store directory")->required();
  report->add_option("--run-id", rep_run, "run identifier");
  report->add_option("--truth", rep_truth, "ground-truth CSV")->required();
  report->add_option("--out", rep_out, "report output directory")->required();
  report->add_option("--extracted", rep_extracted, "experimental porosity CSV");
  report->add_option("--db", rep_db, "computed-properties CSV");
  report->add_option("--map", rep_map, "doi+compound -> refcode mapping CSV");
  report->add_option("--curves", rep_curves, "curve point CSVs for the overlay");
  report->add_option("--iou-threshold", cfg.analysis.iou_threshold, "box match threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }

  if (ingest->parsed()) return cmd_ingest(corpus_dir, dpi, manifest_out, si_suffixes);
  if (prompt->parsed()) return cmd_prompt(prompt_kind, prompt_file);
  if (classify->parsed()) {
    batch.cfg = cfg;
    return cmd_batch("classify", batch);
  }
  if (extract->parsed()) {
    // extraction answers are longer than the 300-token labeling default
    if (extract->count("--max-tokens") == 0 && cfg.api.max_tokens == 300) {
      cfg.api.max_tokens = 1024;
    }
    batch.cfg = cfg;
    return cmd_batch("extract", batch);
  }
  if (parse->parsed()) return cmd_parse(parse_store, parse_run, parse_out, parse_export);
  if (evaluate->parsed()) return cmd_evaluate(eval_pred, eval_truth, eval_report, cfg);
  if (analyze->parsed()) return cmd_analyze(points_file, bet_range_text, analyze_out, cfg);
  if (compare->parsed()) return cmd_compare(cmp_extracted, cmp_db, cmp_map, cmp_out);
  if (cost->parsed()) return cmd_cost(cost_images, cost_budget, cost_concurrency, cfg);
  if (report->parsed()) {
    return cmd_report(rep_store, rep_run, rep_truth, rep_out, rep_extracted, rep_db, rep_map,
                      rep_curves, cfg);
  }
  throw UsageError("no subcommand selected");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const Error& e) {
    print_error(kind_name(e.kind()), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error("validation", e.what());
    return static_cast<int>(ErrorKind::validation);
  }
}
