#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace figmine::ingest {

struct RasterConfig {
  int dpi = 300;
  double scale_factor() const { return dpi / 72.0; }
};

enum class SourceKind { main, supporting };

// Provenance of one rasterized page.
struct PageRecord {
  std::string doi;
  std::string folder;      // publisher prefix grouping, may be empty
  std::string pdf_name;
  std::string image_name;  // "<pdf-stem>_page_<n>.png"
  int page_number = 0;     // 1-based
  SourceKind source_kind = SourceKind::main;
  std::filesystem::path image_path;
  int width_px = 0;
  int height_px = 0;
};

struct IngestOptions {
  RasterConfig raster;
  // A PDF whose filename ends with one of these is supporting information.
  std::vector<std::string> si_suffixes = {"-si.pdf"};
};

inline constexpr const char* kManifestColumns[] = {"DOI", "Folder Name", "PDF Name", "Image Name",
                                                   "Page Number"};

// Rasterizes every page of one PDF into out_dir. Throws ValidationError for
// corrupt or zero-page PDFs (message names the file), IoError when unreadable.
std::vector<PageRecord> render_pdf_to_pages(const std::filesystem::path& pdf_path,
                                            const RasterConfig& cfg,
                                            const std::filesystem::path& out_dir,
                                            const IngestOptions& opts = {},
                                            const std::string& folder = "");

struct IngestResult {
  std::vector<PageRecord> records;
  std::vector<std::string> errors;  // one entry per failed PDF; batch continues
};

// Walks corpus_dir (one level of publisher folders plus loose PDFs), rendering
// page images next to their source PDFs.
IngestResult ingest_corpus(const std::filesystem::path& corpus_dir, const IngestOptions& opts);

// Writes the manifest CSV: DOI,Folder Name,PDF Name,Image Name,Page Number,
// ordered by (folder, pdf, page). Empty record list is a usage error.
void build_manifest(std::vector<PageRecord> records, const std::filesystem::path& out);

// Reads a manifest back; image paths resolve against corpus_dir/folder.
std::vector<PageRecord> read_manifest(const std::filesystem::path& manifest,
                                      const std::filesystem::path& corpus_dir);

}  // namespace figmine::ingest
