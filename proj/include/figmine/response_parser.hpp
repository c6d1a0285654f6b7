#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace figmine::parser {

// Page labels extracted from a classification answer.
struct LabelSet {
  std::vector<int> labels;  // ascending, duplicate-free, subset of {1..6}
  bool degenerate = false;  // "Figures:" present but no valid digit found

  bool operator==(const LabelSet&) const = default;
  bool contains(int cls) const;

  std::string joined() const;                            // "1;4;5"
  static std::vector<int> labels_from_joined(std::string_view text);
  std::string to_response_fragment() const;              // "Figures: (1);(4);(5)"
};

// Total function: any input maps to a LabelSet. Missing "Figures:" yields {6}.
LabelSet parse_label_set(std::string_view raw, std::vector<std::string>* warnings = nullptr);

struct NormBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const NormBox&) const = default;
};
bool valid_norm_box(const NormBox& box);

enum class TriState { yes, no, unknown, na };
const char* to_string(TriState value);
TriState tri_state_from_string(std::string_view text);

struct Saturation {
  enum class State { interval, unknown, na };
  State state = State::na;
  double lo = 0, hi = 0;
  std::string unit;
  bool operator==(const Saturation&) const = default;
};

// The six descriptors of one extraction answer; every field defaults to N/A.
struct IsothermExtraction {
  std::string figure_locator = "N/A";
  std::string compound_text = "N/A";
  std::vector<std::string> compounds;
  std::string porosity = "N/A";
  TriState hysteresis = TriState::na;
  Saturation saturation;
  std::vector<NormBox> regions;

  bool operator==(const IsothermExtraction&) const = default;
};

IsothermExtraction parse_extraction(std::string_view raw,
                                    std::vector<std::string>* warnings = nullptr);

// Field-level parsers (inputs are already-cleaned field values, not "N/A").
std::vector<std::string> parse_compounds(std::string_view field);
Saturation parse_saturation(std::string_view field, std::vector<std::string>* warnings = nullptr);
std::vector<NormBox> parse_regions(std::string_view field,
                                   std::vector<std::string>* warnings = nullptr);

// Strips the "[Answer: ...]" wrapper and filters to the retained charset:
// alphanumerics, " .,-;/()[]" and any non-ASCII byte. Empty results become "N/A".
std::string clean_template_value(std::string_view value);

// The six descriptor values as cleaned strings, keyed "Nitrogen Isotherm",
// "Compound", "Porosity", "Hysteresis", "Saturation", "Position"; absent
// keys yield "N/A".
std::vector<std::pair<std::string, std::string>> cleaned_descriptor_fields(std::string_view raw);

// Parsed-record CSV interchange.
std::vector<std::string> parsed_csv_header();
std::vector<std::string> to_parsed_row(const std::string& img, const LabelSet& labels,
                                       const IsothermExtraction& extraction);
struct ParsedRow {
  std::string img;
  LabelSet labels;
  IsothermExtraction extraction;
  bool has_extraction = false;
};
ParsedRow parsed_row_from_fields(const std::vector<std::string>& header,
                                 const std::vector<std::string>& row);

std::string format_regions(const std::vector<NormBox>& regions);
std::string format_number(double value);

}  // namespace figmine::parser
