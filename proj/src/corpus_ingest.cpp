#include "figmine/corpus_ingest.hpp"

#include <algorithm>

#include "figmine/csv.hpp"
#include "figmine/errors.hpp"
#include "figmine/pdf_mini.hpp"

namespace figmine::ingest {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  return s.substr(0, s.size() - suffix.size());
}

struct NameParts {
  std::string stem;       // filename minus ".pdf" (keeps any SI suffix)
  std::string doi_stem;   // filename minus SI suffix or ".pdf"
  SourceKind kind;
};

NameParts split_pdf_name(const std::string& pdf_name, const IngestOptions& opts) {
  NameParts parts;
  parts.kind = SourceKind::main;
  parts.doi_stem = pdf_name;
  for (const auto& suffix : opts.si_suffixes) {
    if (ends_with(pdf_name, suffix)) {
      parts.kind = SourceKind::supporting;
      parts.doi_stem = strip_suffix(pdf_name, suffix);
      break;
    }
  }
  if (parts.kind == SourceKind::main && ends_with(parts.doi_stem, ".pdf")) {
    parts.doi_stem = strip_suffix(parts.doi_stem, ".pdf");
  }
  parts.stem = ends_with(pdf_name, ".pdf") ? strip_suffix(pdf_name, ".pdf") : pdf_name;
  return parts;
}

}  // namespace

std::vector<PageRecord> render_pdf_to_pages(const std::filesystem::path& pdf_path,
                                            const RasterConfig& cfg,
                                            const std::filesystem::path& out_dir,
                                            const IngestOptions& opts, const std::string& folder) {
  if (cfg.dpi <= 0) throw UsageError("ingest: dpi must be positive");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  pdf::Document doc = [&] {
    try {
      return pdf::Document::open(pdf_path);
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError("ingest: cannot read PDF " + pdf_path.string() + ": " + e.what());
    }
  }();
  if (doc.page_count() == 0) {
    throw ValidationError("ingest: PDF has zero pages: " + pdf_path.string());
  }

  std::string pdf_name = pdf_path.filename().string();
  NameParts parts = split_pdf_name(pdf_name, opts);
  double scale = cfg.scale_factor();

  std::vector<PageRecord> records;
  records.reserve(doc.page_count());
  for (int i = 0; i < doc.page_count(); ++i) {
    png::Image image = doc.render_page(i, scale);
    PageRecord rec;
    rec.folder = folder;
    rec.doi = folder.empty() ? parts.doi_stem : folder + "/" + parts.doi_stem;
    rec.pdf_name = pdf_name;
    rec.page_number = i + 1;
    rec.image_name = parts.stem + "_page_" + std::to_string(rec.page_number) + ".png";
    rec.source_kind = parts.kind;
    rec.image_path = out_dir / rec.image_name;
    rec.width_px = image.width;
    rec.height_px = image.height;
    png::write_file(rec.image_path, image);
    records.push_back(std::move(rec));
  }
  return records;
}

IngestResult ingest_corpus(const std::filesystem::path& corpus_dir, const IngestOptions& opts) {
  if (!std::filesystem::is_directory(corpus_dir)) {
    throw IoError("ingest: corpus directory not found: " + corpus_dir.string());
  }
  struct Work {
    std::filesystem::path pdf;
    std::string folder;
  };
  std::vector<Work> work;
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
    if (entry.is_directory()) {
      subdirs.push_back(entry.path());
    } else if (entry.path().extension() == ".pdf") {
      work.push_back({entry.path(), ""});
    }
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& dir : subdirs) {
    std::vector<std::filesystem::path> pdfs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pdf") pdfs.push_back(entry.path());
    }
    std::sort(pdfs.begin(), pdfs.end());
    for (const auto& pdf : pdfs) work.push_back({pdf, dir.filename().string()});
  }
  std::sort(work.begin(), work.end(), [](const Work& a, const Work& b) {
    return std::tie(a.folder, a.pdf) < std::tie(b.folder, b.pdf);
  });

  IngestResult result;
  for (const auto& [pdf, folder] : work) {
    try {
      auto records = render_pdf_to_pages(pdf, opts.raster, pdf.parent_path(), opts, folder);
      result.records.insert(result.records.end(), std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
    } catch (const Error& e) {
      // one bad file must not kill a whole corpus run
      result.errors.push_back(e.what());
    }
  }
  return result;
}

void build_manifest(std::vector<PageRecord> records, const std::filesystem::path& out) {
  if (records.empty()) throw UsageError("ingest: no page records; manifest not written");
  std::sort(records.begin(), records.end(), [](const PageRecord& a, const PageRecord& b) {
    return std::tie(a.folder, a.pdf_name, a.page_number) <
           std::tie(b.folder, b.pdf_name, b.page_number);
  });
  csv::Table table;
  table.header.assign(std::begin(kManifestColumns), std::end(kManifestColumns));
  for (const auto& rec : records) {
    table.rows.push_back({rec.doi, rec.folder, rec.pdf_name, rec.image_name,
                          std::to_string(rec.page_number)});
  }
  csv::write_file(out, table);
}

std::vector<PageRecord> read_manifest(const std::filesystem::path& manifest,
                                      const std::filesystem::path& corpus_dir) {
  csv::Table table = csv::read_file(manifest);
  std::vector<std::string> expected(std::begin(kManifestColumns), std::end(kManifestColumns));
  if (table.header != expected) {
    throw ValidationError("ingest: unexpected manifest header in " + manifest.string());
  }
  std::vector<PageRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.size() != 5) throw ValidationError("ingest: malformed manifest row in " + manifest.string());
    PageRecord rec;
    rec.doi = row[0];
    rec.folder = row[1];
    rec.pdf_name = row[2];
    rec.image_name = row[3];
    try {
      rec.page_number = std::stoi(row[4]);
    } catch (...) {
      throw ValidationError("ingest: non-numeric page number in " + manifest.string());
    }
    rec.source_kind = SourceKind::main;
    rec.image_path = rec.folder.empty() ? corpus_dir / rec.image_name
                                        : corpus_dir / rec.folder / rec.image_name;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace figmine::ingest
