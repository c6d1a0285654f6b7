#include "support/fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

#include "figmine/csv.hpp"
#include "figmine/hash.hpp"
#include "figmine/pdf_mini.hpp"
#include "figmine/pipeline_store.hpp"

namespace figtest {

namespace fs = std::filesystem;
using figmine::parser::IsothermExtraction;
using figmine::parser::NormBox;
using figmine::parser::Saturation;
using figmine::parser::TriState;

TempDir::TempDir(const std::string& hint) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("figmine_" + hint + "_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string no_isotherm_response(const std::string& label_list) {
  return "Figures: [Answer: " + label_list + "]\nNitrogen Isotherm: No";
}

namespace {

std::string isotherm_response(const std::string& label_list, const std::string& figure,
                              const std::string& compound, const std::string& porosity,
                              const std::string& hysteresis, const std::string& saturation,
                              const std::string& position) {
  return "Figures: [Answer: " + label_list + "]\nNitrogen Isotherm: [Answer: " + figure +
         "]\nCompound: [Answer: " + compound + "]\nPorosity: [Answer: " + porosity +
         "]\nHysteresis: [Answer: " + hysteresis + "]\nSaturation: [Answer: " + saturation +
         "]\nPosition: [Answer: " + position + "]";
}

IsothermExtraction no_isotherm_truth() {
  IsothermExtraction t;
  t.figure_locator = "No";
  return t;
}

IsothermExtraction isotherm_truth(const std::string& figure,
                                  const std::vector<std::string>& compounds,
                                  const std::string& porosity, TriState hysteresis,
                                  Saturation saturation, std::vector<NormBox> regions) {
  IsothermExtraction t;
  t.figure_locator = figure;
  t.compounds = compounds;
  t.compound_text = compounds.empty() ? "N/A" : compounds.front();
  t.porosity = porosity;
  t.hysteresis = hysteresis;
  t.saturation = saturation;
  t.regions = std::move(regions);
  return t;
}

Saturation interval(double lo, double hi, const std::string& unit) {
  Saturation s;
  s.state = Saturation::State::interval;
  s.lo = lo;
  s.hi = hi;
  s.unit = unit;
  return s;
}

Saturation sat_unknown() {
  Saturation s;
  s.state = Saturation::State::unknown;
  return s;
}

std::vector<PageSpec> make_specs() {
  std::vector<PageSpec> specs;
  auto add = [&](const std::string& folder, const std::string& pdf, int page,
                 std::vector<int> gt, std::string response, IsothermExtraction truth) {
    PageSpec spec;
    spec.folder = folder;
    spec.pdf = pdf;
    spec.page = page;
    spec.gt_labels = std::move(gt);
    spec.response = std::move(response);
    spec.truth_extraction = std::move(truth);
    specs.push_back(std::move(spec));
  };

  const std::string f1 = "10.1021", si = "mof-alpha-si.pdf", main = "mof-alpha.pdf";
  const std::string f2 = "10.1038", beta = "cof-beta.pdf";

  // ---- 10.1021/mof-alpha-si.pdf (8 pages)
  add(f1, si, 1, {2}, no_isotherm_response("(2)"), no_isotherm_truth());
  add(f1, si, 2, {1, 2},
      isotherm_response("(1);(2)", "Figure S2", "CAU-23", "N/A", "I do not know",
                        "I do not know", "(0,0,1,0.5); (0.1,0.55,0.9,0.95)"),
      isotherm_truth("Figure S2", {"CAU-23"}, "N/A", TriState::unknown, sat_unknown(),
                     {{0, 0, 1, 0.5}, {0.1, 0.55, 0.9, 0.95}}));
  add(f1, si, 3, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f1, si, 4, {3}, no_isotherm_response("(2)"), no_isotherm_truth());  // confuses TGA as PXRD
  add(f1, si, 5, {4}, no_isotherm_response("(4)"), no_isotherm_truth());
  add(f1, si, 6, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f1, si, 7, {5}, no_isotherm_response("(5);(6)"), no_isotherm_truth());
  add(f1, si, 8, {2, 4}, no_isotherm_response("(2);(4)"), no_isotherm_truth());

  // ---- 10.1021/mof-alpha.pdf (10 pages)
  add(f1, main, 1, {1, 3, 4},
      isotherm_response("(1);(4);(5)", "Figure 2a", "MOF-5", "3100 m2/g", "No",
                        "1200 - 1300 cm³/g", "(0,0,0.5,0.5)"),
      isotherm_truth("Figure 2a", {"MOF-5"}, "3100 m2/g", TriState::no,
                     interval(1200, 1300, "cm³/g"), {{0, 0, 0.5, 0.5}}));
  add(f1, main, 2, {2}, no_isotherm_response("(2)"), no_isotherm_truth());
  add(f1, main, 3, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f1, main, 4, {2, 3}, no_isotherm_response("(2);(3)"), no_isotherm_truth());
  add(f1, main, 5, {4}, no_isotherm_response("(4)"), no_isotherm_truth());
  add(f1, main, 6, {1},
      isotherm_response("(1)", "Figure 4", "ads MOF-303, des MOF-303", "N/A", "Yes",
                        "300 - 400 cm³/g", "(0,0,1,0.5)"),
      isotherm_truth("Figure 4", {"MOF-303"}, "N/A", TriState::yes, interval(300, 400, "cm³/g"),
                     {{0, 0, 1, 0.5}}));
  add(f1, main, 7, {5}, no_isotherm_response("(5)"), no_isotherm_truth());
  add(f1, main, 8, {6}, no_isotherm_response("(4)"), no_isotherm_truth());
  add(f1, main, 9, {2}, "Figures: [Answer: none observed]\nNitrogen Isotherm: No",
      no_isotherm_truth());  // degenerate: key present, no digits
  add(f1, main, 10, {3}, no_isotherm_response("(3)"), no_isotherm_truth());

  // ---- 10.1038/cof-beta.pdf (12 pages)
  add(f2, beta, 1, {1},
      isotherm_response("(1)", "Fig. 3(b)", "COF-beta", "1360 m2/g", "No", "500 - 520 cm³/g",
                        "(0.5,0.5,1,1)"),
      isotherm_truth("Figure 3b", {"COF-beta"}, "1355 m2/g", TriState::no,
                     interval(510, 515, "cm³/g"), {{0.5, 0.5, 1, 1}}));
  add(f2, beta, 2, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f2, beta, 3, {2}, no_isotherm_response("(2)"), no_isotherm_truth());
  add(f2, beta, 4, {4}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f2, beta, 5, {3}, no_isotherm_response("(3)"), no_isotherm_truth());
  add(f2, beta, 6, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f2, beta, 7, {1, 4},
      isotherm_response("(1);(4)", "Figure 5", "COF-gamma", "820 m2/g", "No", "410 cm³/g",
                        "(0,0,1,0.5)"),
      isotherm_truth("Figure 5", {"COF-gamma"}, "820 m2/g", TriState::no,
                     interval(405, 415, "cm³/g"), {{0, 0.25, 1, 0.75}}));  // IoU 1/3: miss
  add(f2, beta, 8, {2}, no_isotherm_response("(2)"), no_isotherm_truth());
  add(f2, beta, 9, {5}, no_isotherm_response("(5)"), no_isotherm_truth());
  add(f2, beta, 10, {6}, no_isotherm_response("(6)"), no_isotherm_truth());
  add(f2, beta, 11, {4}, no_isotherm_response("(4)"), no_isotherm_truth());
  add(f2, beta, 12, {1, 2, 3},
      isotherm_response("(1);(2);(3)", "Figure 7", "MOF-808", "2100 m2/g", "No",
                        "600 - 700 cm³/g", "(0,0.5,1,1)"),
      isotherm_truth("Figure 7", {"MOF-808"}, "2100 m2/g", TriState::yes,
                     interval(600, 700, "cm³/g"), {{0, 0.5, 1, 1}}));  // hysteresis: miss
  return specs;
}

}  // namespace

const std::vector<PageSpec>& fixture_page_specs() {
  static const std::vector<PageSpec> specs = make_specs();
  return specs;
}

void write_sample_pdf(const fs::path& path, int pages, int seed, bool compress) {
  figmine::pdf::Builder builder;
  for (int p = 0; p < pages; ++p) {
    std::string ops;
    // a header band and a few page-unique blocks make every page hash distinct
    ops += figmine::pdf::ops::fill_rect(36, 740, 540, 24, 0.85, 0.85, 0.92);
    int k = seed * 31 + p;
    for (int block = 0; block < 3; ++block) {
      double x = 50 + 37.0 * ((k + block * 7) % 12);
      double y = 120 + 43.0 * ((k * 3 + block * 5) % 13);
      double shade = 0.15 + 0.05 * ((k + block) % 10);
      ops += figmine::pdf::ops::fill_rect(x, y, 90, 60, shade, 0.3, 0.8 - 0.04 * block);
    }
    ops += figmine::pdf::ops::stroke_polyline(
        {{72, 144}, {200, 200.0 + (k % 9) * 12}, {340, 260.0 + (k % 5) * 15}, {520, 380}}, 0.8,
        0.2, 0.2, 2.0);
    builder.add_page(612, 792, ops);
  }
  builder.save(path, compress);
}

FixtureCorpus build_fixture_corpus(const fs::path& root, int dpi) {
  FixtureCorpus corpus;
  corpus.corpus_dir = root / "corpus";
  corpus.fixtures_dir = root / "replay_fixtures";
  fs::create_directories(corpus.corpus_dir);
  fs::create_directories(corpus.fixtures_dir);

  // group specs by (folder, pdf) to emit each PDF once
  const auto& specs = fixture_page_specs();
  struct PdfGroup {
    std::string folder, pdf;
    int pages = 0;
  };
  std::vector<PdfGroup> groups;
  for (const auto& spec : specs) {
    if (groups.empty() || groups.back().folder != spec.folder || groups.back().pdf != spec.pdf) {
      groups.push_back({spec.folder, spec.pdf, 0});
    }
    groups.back().pages = std::max(groups.back().pages, spec.page);
  }
  int seed = 1;
  for (const auto& group : groups) {
    fs::path dir = corpus.corpus_dir / group.folder;
    fs::create_directories(dir);
    write_sample_pdf(dir / group.pdf, group.pages, seed++);
  }

  figmine::ingest::IngestOptions opts;
  opts.raster.dpi = dpi;
  auto result = figmine::ingest::ingest_corpus(corpus.corpus_dir, opts);
  if (!result.errors.empty()) {
    throw std::runtime_error("fixture corpus ingest failed: " + result.errors.front());
  }
  corpus.records = result.records;
  corpus.manifest = corpus.corpus_dir / "manifest.csv";
  figmine::ingest::build_manifest(corpus.records, corpus.manifest);

  // align rendered records with specs (both in manifest order)
  if (corpus.records.size() != specs.size()) {
    throw std::runtime_error("fixture corpus page count mismatch");
  }

  figmine::csv::Table truth;
  truth.header = figmine::parser::parsed_csv_header();
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& record = corpus.records[i];
    const auto& spec = specs[i];
    if (record.pdf_name != spec.pdf || record.page_number != spec.page) {
      throw std::runtime_error("fixture corpus order mismatch at index " + std::to_string(i));
    }
    std::string key = figmine::store::image_key_for(record.image_path);
    std::ofstream out(corpus.fixtures_dir / (key + ".txt"), std::ios::binary);
    out << spec.response;

    figmine::parser::LabelSet gt;
    gt.labels = spec.gt_labels;
    truth.rows.push_back(figmine::parser::to_parsed_row(record.image_path.string(), gt,
                                                        spec.truth_extraction));
  }
  corpus.truth_csv = root / "truth.csv";
  figmine::csv::write_file(corpus.truth_csv, truth);
  return corpus;
}

}  // namespace figtest
