#include "figmine/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "figmine/errors.hpp"

namespace figmine::parser {

namespace {

bool ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && ascii_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (ascii_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

bool retained_char(unsigned char c) {
  if (c >= 0x80) return true;  // keep multi-byte characters such as the cm³ superscript
  if (std::isalnum(c)) return true;
  static const std::string extra = " .,-;/()[]";
  return extra.find(static_cast<char>(c)) != std::string::npos;
}

// Scans one decimal number starting at or after `pos`; returns value and
// advances pos past it, or nullopt when no digit remains.
std::optional<double> scan_number(std::string_view s, size_t& pos) {
  size_t i = pos;
  while (i < s.size() && !(std::isdigit(static_cast<unsigned char>(s[i])) ||
                           (s[i] == '.' && i + 1 < s.size() &&
                            std::isdigit(static_cast<unsigned char>(s[i + 1]))))) {
    ++i;
  }
  if (i >= s.size()) return std::nullopt;
  char* end = nullptr;
  std::string tail(s.substr(i));
  double value = std::strtod(tail.c_str(), &end);
  if (end == tail.c_str()) return std::nullopt;
  pos = i + static_cast<size_t>(end - tail.c_str());
  return value;
}

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

}  // namespace

bool LabelSet::contains(int cls) const {
  return std::find(labels.begin(), labels.end(), cls) != labels.end();
}

std::string LabelSet::joined() const {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out.push_back(';');
    out += std::to_string(labels[i]);
  }
  return out;
}

std::vector<int> LabelSet::labels_from_joined(std::string_view text) {
  std::set<int> labels;
  for (char c : text) {
    if (c >= '1' && c <= '6') labels.insert(c - '0');
  }
  return {labels.begin(), labels.end()};
}

std::string LabelSet::to_response_fragment() const {
  std::string out = "Figures: ";
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out.push_back(';');
    out += "(" + std::to_string(labels[i]) + ")";
  }
  return out;
}

LabelSet parse_label_set(std::string_view raw, std::vector<std::string>* warnings) {
  // newlines and square brackets act as plain separators
  std::string normalized;
  normalized.reserve(raw.size());
  for (char c : raw) {
    normalized.push_back((c == '\n' || c == '[' || c == ']') ? ' ' : c);
  }
  normalized = trim(normalized);

  LabelSet result;
  if (normalized.find("Figures:") == std::string::npos) {
    result.labels = {6};  // no recognizable answer line: none-of-the-above
    return result;
  }

  size_t ni = normalized.find("Nitrogen Isotherm:");
  if (ni != std::string::npos) normalized = normalized.substr(0, ni);
  size_t fig = normalized.find("Figures:");
  if (fig != std::string::npos) normalized = normalized.substr(fig);

  std::set<int> digits;
  for (size_t i = 0; i + 2 < normalized.size(); ++i) {
    if (normalized[i] == '(' && std::isdigit(static_cast<unsigned char>(normalized[i + 1])) &&
        normalized[i + 2] == ')') {
      int value = normalized[i + 1] - '0';
      if (value >= 1 && value <= 6) digits.insert(value);
    }
  }
  result.labels.assign(digits.begin(), digits.end());
  if (result.labels.empty()) result.degenerate = true;

  if (result.contains(6) && result.labels.size() > 1) {
    warn(warnings, "label 6 (none of above) co-occurs with content labels");
  }
  return result;
}

std::string clean_template_value(std::string_view value) {
  std::string text(value);

  // unwrap every "[Answer: ...]"
  while (true) {
    size_t open = text.find('[');
    bool replaced = false;
    while (open != std::string::npos) {
      size_t p = open + 1;
      while (p < text.size() && ascii_space(static_cast<unsigned char>(text[p]))) ++p;
      if (text.compare(p, 6, "Answer") == 0) {
        p += 6;
        while (p < text.size() && ascii_space(static_cast<unsigned char>(text[p]))) ++p;
        if (p < text.size() && text[p] == ':') {
          ++p;
          size_t close = text.find(']', p);
          if (close != std::string::npos) {
            std::string inner = trim(text.substr(p, close - p));
            text = text.substr(0, open) + inner + text.substr(close + 1);
            replaced = true;
            break;
          }
        }
      }
      open = text.find('[', open + 1);
    }
    if (!replaced) break;
  }

  std::string filtered;
  filtered.reserve(text.size());
  for (unsigned char c : text) {
    if (retained_char(c)) filtered.push_back(static_cast<char>(c));
  }
  filtered = trim(filtered);
  return filtered.empty() ? "N/A" : filtered;
}

std::vector<std::string> parse_compounds(std::string_view field) {
  std::vector<std::string> out;
  std::vector<std::string> seen_lower;
  std::string current;
  auto flush = [&] {
    // drop branch-labeling tokens, keep the compound name itself
    std::istringstream words(collapse_spaces(trim(current)));
    std::string word, rebuilt;
    while (words >> word) {
      if (iequals(word, "ads") || iequals(word, "des") || iequals(word, "adsorption") ||
          iequals(word, "desorption")) {
        continue;
      }
      if (!rebuilt.empty()) rebuilt.push_back(' ');
      rebuilt += word;
    }
    current.clear();
    if (rebuilt.empty()) return;
    std::string key = lower(rebuilt);
    if (std::find(seen_lower.begin(), seen_lower.end(), key) != seen_lower.end()) return;
    seen_lower.push_back(key);
    out.push_back(rebuilt);
  };
  for (char c : field) {
    if (c == ',') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

Saturation parse_saturation(std::string_view field, std::vector<std::string>* warnings) {
  Saturation result;
  std::string text = trim(field);
  if (iequals(text, "I do not know")) {
    result.state = Saturation::State::unknown;
    return result;
  }

  size_t pos = 0;
  auto first = scan_number(text, pos);
  if (!first) {
    warn(warnings, "saturation: no numeric value in '" + text + "'");
    result.state = Saturation::State::unknown;
    return result;
  }
  double lo = *first;
  double hi = lo;

  size_t after = pos;
  while (after < text.size() && ascii_space(static_cast<unsigned char>(text[after]))) ++after;
  if (after < text.size() && text[after] == '-') {
    size_t second_pos = after + 1;
    auto second = scan_number(text, second_pos);
    if (second) {
      hi = *second;
      pos = second_pos;
    }
  }
  if (lo > hi) {
    warn(warnings, "saturation: descending range normalized");
    std::swap(lo, hi);
  }
  result.state = Saturation::State::interval;
  result.lo = lo;
  result.hi = hi;
  result.unit = trim(text.substr(pos));
  return result;
}

bool valid_norm_box(const NormBox& box) {
  return box.x1 >= 0 && box.x1 < box.x2 && box.x2 <= 1 && box.y1 >= 0 && box.y1 < box.y2 &&
         box.y2 <= 1;
}

std::vector<NormBox> parse_regions(std::string_view field, std::vector<std::string>* warnings) {
  std::vector<NormBox> out;
  size_t pos = 0;
  while (true) {
    size_t open = field.find('(', pos);
    if (open == std::string::npos) break;
    size_t close = field.find(')', open + 1);
    if (close == std::string::npos) break;
    pos = close + 1;

    std::string_view inner = field.substr(open + 1, close - open - 1);
    std::vector<double> values;
    std::string token;
    auto take = [&] {
      std::string t = trim(token);
      token.clear();
      if (t.empty()) return false;
      char* end = nullptr;
      double v = std::strtod(t.c_str(), &end);
      if (end == t.c_str() || *end != '\0') return false;
      values.push_back(v);
      return true;
    };
    bool numeric = true;
    for (char c : inner) {
      if (c == ',') {
        numeric = take() && numeric;
      } else {
        token.push_back(c);
      }
    }
    numeric = take() && numeric;
    if (!numeric || values.size() != 4) continue;  // not a coordinate tuple

    NormBox box{values[0], values[1], values[2], values[3]};
    if (!valid_norm_box(box)) {
      warn(warnings, "region tuple rejected (invariant violation): (" + trim(std::string(inner)) + ")");
      continue;
    }
    out.push_back(box);
  }
  return out;
}

const char* to_string(TriState value) {
  switch (value) {
    case TriState::yes: return "yes";
    case TriState::no: return "no";
    case TriState::unknown: return "unknown";
    case TriState::na: return "N/A";
  }
  return "N/A";
}

TriState tri_state_from_string(std::string_view text) {
  std::string t = lower(trim(text));
  if (t == "yes") return TriState::yes;
  if (t == "no") return TriState::no;
  if (t == "unknown" || t == "i do not know") return TriState::unknown;
  return TriState::na;
}

std::vector<std::pair<std::string, std::string>> cleaned_descriptor_fields(std::string_view raw) {
  static const char* kKeys[] = {"Nitrogen Isotherm", "Compound",   "Porosity",
                                "Hysteresis",        "Saturation", "Position"};
  std::string text(raw);
  std::vector<std::pair<std::string, std::string>> fields;
  for (const char* key : kKeys) {
    std::string marker = std::string(key) + ": ";
    size_t at = text.find(marker);
    if (at == std::string::npos) {
      fields.emplace_back(key, "N/A");
      continue;
    }
    size_t start = at + marker.size();
    size_t end = text.find('\n', start);
    std::string value =
        text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    fields.emplace_back(key, clean_template_value(value));
  }
  return fields;
}

IsothermExtraction parse_extraction(std::string_view raw, std::vector<std::string>* warnings) {
  IsothermExtraction result;
  auto fields = cleaned_descriptor_fields(raw);

  auto field_after = [&](std::string_view key) -> std::optional<std::string> {
    for (const auto& [name, value] : fields) {
      if (name == key) return value;
    }
    return std::nullopt;
  };

  if (auto v = field_after("Nitrogen Isotherm")) result.figure_locator = *v;
  if (auto v = field_after("Compound")) {
    result.compound_text = *v;
    if (*v != "N/A") result.compounds = parse_compounds(*v);
  }
  if (auto v = field_after("Porosity")) result.porosity = *v;
  if (auto v = field_after("Hysteresis")) {
    if (*v == "N/A") {
      result.hysteresis = TriState::na;
    } else if (iequals(*v, "yes")) {
      result.hysteresis = TriState::yes;
    } else if (iequals(*v, "no")) {
      result.hysteresis = TriState::no;
    } else if (iequals(*v, "I do not know")) {
      result.hysteresis = TriState::unknown;
    } else {
      warn(warnings, "hysteresis: unrecognized value '" + *v + "'");
      result.hysteresis = TriState::unknown;
    }
  }
  if (auto v = field_after("Saturation")) {
    if (*v != "N/A") result.saturation = parse_saturation(*v, warnings);
  }
  if (auto v = field_after("Position")) {
    if (*v != "N/A") result.regions = parse_regions(*v, warnings);
  }
  return result;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::string format_regions(const std::vector<NormBox>& regions) {
  std::string out;
  for (size_t i = 0; i < regions.size(); ++i) {
    if (i) out.push_back(';');
    out += "(" + format_number(regions[i].x1) + "," + format_number(regions[i].y1) + "," +
           format_number(regions[i].x2) + "," + format_number(regions[i].y2) + ")";
  }
  return out;
}

std::vector<std::string> parsed_csv_header() {
  return {"img",        "labels",     "degenerate",    "figure_locator",
          "compounds",  "porosity",   "hysteresis",    "saturation_lo",
          "saturation_hi", "saturation_unit", "regions"};
}

std::vector<std::string> to_parsed_row(const std::string& img, const LabelSet& labels,
                                       const IsothermExtraction& extraction) {
  std::string joined_compounds;
  for (size_t i = 0; i < extraction.compounds.size(); ++i) {
    if (i) joined_compounds.push_back(';');
    joined_compounds += extraction.compounds[i];
  }
  std::string sat_lo, sat_hi, sat_unit;
  switch (extraction.saturation.state) {
    case Saturation::State::interval:
      sat_lo = format_number(extraction.saturation.lo);
      sat_hi = format_number(extraction.saturation.hi);
      sat_unit = extraction.saturation.unit;
      break;
    case Saturation::State::unknown:
      sat_unit = "unknown";
      break;
    case Saturation::State::na:
      sat_unit = "N/A";
      break;
  }
  return {img,
          labels.joined(),
          labels.degenerate ? "true" : "false",
          extraction.figure_locator,
          joined_compounds,
          extraction.porosity,
          to_string(extraction.hysteresis),
          sat_lo,
          sat_hi,
          sat_unit,
          format_regions(extraction.regions)};
}

ParsedRow parsed_row_from_fields(const std::vector<std::string>& header,
                                 const std::vector<std::string>& row) {
  auto index_of = [&](std::string_view name) -> int {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  auto get = [&](std::string_view name) -> std::optional<std::string> {
    int idx = index_of(name);
    if (idx < 0 || static_cast<size_t>(idx) >= row.size()) return std::nullopt;
    return row[idx];
  };

  ParsedRow parsed;
  auto img = get("img");
  if (!img) throw ValidationError("parsed row: missing img column");
  parsed.img = *img;
  if (auto labels = get("labels")) parsed.labels.labels = LabelSet::labels_from_joined(*labels);
  if (auto degenerate = get("degenerate")) parsed.labels.degenerate = (*degenerate == "true");

  parsed.has_extraction = index_of("figure_locator") >= 0;
  if (!parsed.has_extraction) return parsed;

  IsothermExtraction& ext = parsed.extraction;
  if (auto v = get("figure_locator")) ext.figure_locator = v->empty() ? "N/A" : *v;
  if (auto v = get("compounds")) {
    std::string token;
    for (char c : *v) {
      if (c == ';') {
        if (!trim(token).empty()) ext.compounds.push_back(trim(token));
        token.clear();
      } else {
        token.push_back(c);
      }
    }
    if (!trim(token).empty()) ext.compounds.push_back(trim(token));
    ext.compound_text = ext.compounds.empty() ? "N/A" : *v;
  }
  if (auto v = get("porosity")) ext.porosity = v->empty() ? "N/A" : *v;
  if (auto v = get("hysteresis")) ext.hysteresis = tri_state_from_string(*v);
  auto lo = get("saturation_lo");
  auto hi = get("saturation_hi");
  auto unit = get("saturation_unit");
  if (lo && !lo->empty() && hi && !hi->empty()) {
    ext.saturation.state = Saturation::State::interval;
    ext.saturation.lo = std::strtod(lo->c_str(), nullptr);
    ext.saturation.hi = std::strtod(hi->c_str(), nullptr);
    ext.saturation.unit = unit ? *unit : "";
  } else if (unit && *unit == "unknown") {
    ext.saturation.state = Saturation::State::unknown;
  } else {
    ext.saturation.state = Saturation::State::na;
  }
  if (auto v = get("regions")) ext.regions = parse_regions(*v, nullptr);
  return parsed;
}

}  // namespace figmine::parser
