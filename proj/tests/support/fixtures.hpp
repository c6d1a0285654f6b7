#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "figmine/corpus_ingest.hpp"
#include "figmine/response_parser.hpp"

namespace figtest {

// Self-deleting unique directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& hint);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// One synthetic page: its ground truth and the canned model answer.
struct PageSpec {
  std::string folder;
  std::string pdf;   // file name
  int page = 0;      // 1-based
  std::vector<int> gt_labels;
  std::string response;
  figmine::parser::IsothermExtraction truth_extraction;
};

// The 30-page synthetic corpus in manifest order (folder, pdf, page).
const std::vector<PageSpec>& fixture_page_specs();

std::string no_isotherm_response(const std::string& label_list);

struct FixtureCorpus {
  std::filesystem::path corpus_dir;
  std::filesystem::path manifest;
  std::filesystem::path fixtures_dir;  // replay fixtures keyed by image hash
  std::filesystem::path truth_csv;     // parsed-row format with descriptor columns
  std::vector<figmine::ingest::PageRecord> records;  // manifest order
};

// Writes the PDFs, rasterizes them, builds the manifest, authors replay
// fixtures for every page image and writes the ground-truth CSV.
FixtureCorpus build_fixture_corpus(const std::filesystem::path& root, int dpi = 72);

// A small PDF with `pages` visually distinct pages (US letter).
void write_sample_pdf(const std::filesystem::path& path, int pages, int seed,
                      bool compress = true);

}  // namespace figtest
