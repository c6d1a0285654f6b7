#include "figmine/pdf_mini.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "figmine/errors.hpp"

namespace figmine::pdf {

namespace {

// ---------------------------------------------------------------- values

struct Value;
using Array = std::vector<Value>;
using Dict = std::map<std::string, Value>;

struct Ref {
  int num = 0;
  int gen = 0;
};

struct Value {
  std::variant<std::monostate, bool, double, std::string, Array, Dict, Ref> v;

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_name_or_string() const { return std::holds_alternative<std::string>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
  bool is_dict() const { return std::holds_alternative<Dict>(v); }
  bool is_ref() const { return std::holds_alternative<Ref>(v); }

  double number() const { return std::get<double>(v); }
  const std::string& text() const { return std::get<std::string>(v); }
  const Array& array() const { return std::get<Array>(v); }
  const Dict& dict() const { return std::get<Dict>(v); }
  Ref ref() const { return std::get<Ref>(v); }
};

struct IndirectObject {
  Value value;
  std::vector<unsigned char> stream;  // raw (still encoded) stream payload
  bool has_stream = false;
};

bool is_ws(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}
bool is_delim(unsigned char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

std::vector<unsigned char> inflate_all(std::span<const unsigned char> data,
                                       const std::string& what) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw ValidationError("pdf: inflate init failed");
  std::vector<unsigned char> out;
  out.reserve(data.size() * 4 + 64);
  unsigned char buf[16384];
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw ValidationError("pdf: corrupt FlateDecode stream in " + what);
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw ValidationError("pdf: truncated FlateDecode stream in " + what);
  return out;
}

std::vector<unsigned char> deflate_all(std::span<const unsigned char> data) {
  uLongf bound = compressBound(static_cast<uLong>(data.size()));
  std::vector<unsigned char> out(bound);
  if (compress2(out.data(), &bound, data.data(), static_cast<uLong>(data.size()), 6) != Z_OK) {
    throw ValidationError("pdf: deflate failed");
  }
  out.resize(bound);
  return out;
}

// ---------------------------------------------------------------- lexer

class Lexer {
 public:
  Lexer(std::span<const unsigned char> data, size_t pos) : data_(data), pos_(pos) {}

  size_t pos() const { return pos_; }
  void seek(size_t pos) { pos_ = pos; }

  void skip_ws() {
    while (pos_ < data_.size()) {
      unsigned char c = data_[pos_];
      if (is_ws(c)) {
        ++pos_;
      } else if (c == '%') {
        while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= data_.size();
  }

  unsigned char peek() const { return pos_ < data_.size() ? data_[pos_] : 0; }

  // Raw keyword/number token (not strings, arrays or dicts).
  std::string next_word() {
    skip_ws();
    std::string word;
    while (pos_ < data_.size() && !is_ws(data_[pos_]) && !is_delim(data_[pos_])) {
      word.push_back(static_cast<char>(data_[pos_++]));
    }
    return word;
  }

  bool try_keyword(const std::string& kw) {
    skip_ws();
    size_t saved = pos_;
    if (next_word() == kw) return true;
    pos_ = saved;
    return false;
  }

  std::span<const unsigned char> data() const { return data_; }

 private:
  std::span<const unsigned char> data_;
  size_t pos_;
};

class ValueParser {
 public:
  explicit ValueParser(Lexer& lex) : lex_(lex) {}

  Value parse() {
    lex_.skip_ws();
    if (lex_.pos() >= lex_.data().size()) throw ValidationError("pdf: unexpected end of data");
    unsigned char c = lex_.peek();
    if (c == '/') return parse_name();
    if (c == '(') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '<') {
      if (lex_.pos() + 1 < lex_.data().size() && lex_.data()[lex_.pos() + 1] == '<') {
        return parse_dict();
      }
      return parse_hex_string();
    }
    std::string word = lex_.next_word();
    if (word.empty()) throw ValidationError("pdf: stray delimiter in object");
    if (word == "true") return Value{true};
    if (word == "false") return Value{false};
    if (word == "null") return Value{};
    return parse_number_or_ref(word);
  }

 private:
  Value parse_name() {
    lex_.seek(lex_.pos() + 1);  // consume '/'
    std::string name = "/";
    while (lex_.pos() < lex_.data().size()) {
      unsigned char c = lex_.data()[lex_.pos()];
      if (is_ws(c) || is_delim(c)) break;
      name.push_back(static_cast<char>(c));
      lex_.seek(lex_.pos() + 1);
    }
    return Value{name};
  }

  Value parse_literal_string() {
    lex_.seek(lex_.pos() + 1);
    std::string out;
    int depth = 1;
    while (lex_.pos() < lex_.data().size()) {
      char c = static_cast<char>(lex_.data()[lex_.pos()]);
      lex_.seek(lex_.pos() + 1);
      if (c == '\\' && lex_.pos() < lex_.data().size()) {
        out.push_back(static_cast<char>(lex_.data()[lex_.pos()]));
        lex_.seek(lex_.pos() + 1);
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') {
        if (--depth == 0) return Value{out};
      }
      out.push_back(c);
    }
    throw ValidationError("pdf: unterminated string");
  }

  Value parse_hex_string() {
    lex_.seek(lex_.pos() + 1);
    std::string out;
    while (lex_.pos() < lex_.data().size() && lex_.data()[lex_.pos()] != '>') {
      lex_.seek(lex_.pos() + 1);  // content ignored; fixtures do not use hex strings
    }
    if (lex_.pos() >= lex_.data().size()) throw ValidationError("pdf: unterminated hex string");
    lex_.seek(lex_.pos() + 1);
    return Value{out};
  }

  Value parse_array() {
    lex_.seek(lex_.pos() + 1);
    Array items;
    while (true) {
      lex_.skip_ws();
      if (lex_.pos() >= lex_.data().size()) throw ValidationError("pdf: unterminated array");
      if (lex_.peek() == ']') {
        lex_.seek(lex_.pos() + 1);
        return Value{items};
      }
      items.push_back(parse());
    }
  }

  Value parse_dict() {
    lex_.seek(lex_.pos() + 2);  // consume '<<'
    Dict dict;
    while (true) {
      lex_.skip_ws();
      if (lex_.pos() + 1 < lex_.data().size() && lex_.peek() == '>' &&
          lex_.data()[lex_.pos() + 1] == '>') {
        lex_.seek(lex_.pos() + 2);
        return Value{dict};
      }
      if (lex_.pos() >= lex_.data().size()) throw ValidationError("pdf: unterminated dictionary");
      Value key = parse();
      if (!key.is_name_or_string() || key.text().empty() || key.text()[0] != '/') {
        throw ValidationError("pdf: dictionary key is not a name");
      }
      dict[key.text()] = parse();
    }
  }

  Value parse_number_or_ref(const std::string& word) {
    char* end = nullptr;
    double num = std::strtod(word.c_str(), &end);
    if (end == word.c_str() || *end != '\0') {
      throw ValidationError("pdf: unexpected token '" + word + "'");
    }
    // "<int> <int> R" forms an indirect reference.
    if (num == std::floor(num) && num >= 0) {
      size_t saved = lex_.pos();
      lex_.skip_ws();
      size_t gen_start = lex_.pos();
      std::string second = lex_.next_word();
      bool second_int = !second.empty() &&
                        std::all_of(second.begin(), second.end(),
                                    [](unsigned char ch) { return std::isdigit(ch); });
      if (second_int) {
        if (lex_.try_keyword("R")) {
          return Value{Ref{static_cast<int>(num), std::stoi(second)}};
        }
      }
      lex_.seek(second_int ? gen_start : saved);
      lex_.seek(saved);
    }
    return Value{num};
  }

  Lexer& lex_;
};

// ---------------------------------------------------------------- raster

struct DeviceColor {
  unsigned char r = 0, g = 0, b = 0;
};

unsigned char to_byte(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

class Raster {
 public:
  Raster(png::Image& img) : img_(img) {}

  void fill_rect(double x0, double y0, double x1, double y1, DeviceColor c) {
    int ix0 = std::clamp(static_cast<int>(std::floor(std::min(x0, x1))), 0, img_.width);
    int ix1 = std::clamp(static_cast<int>(std::ceil(std::max(x0, x1))), 0, img_.width);
    int iy0 = std::clamp(static_cast<int>(std::floor(std::min(y0, y1))), 0, img_.height);
    int iy1 = std::clamp(static_cast<int>(std::ceil(std::max(y0, y1))), 0, img_.height);
    for (int y = iy0; y < iy1; ++y) {
      for (int x = ix0; x < ix1; ++x) set(x, y, c);
    }
  }

  void line(double fx0, double fy0, double fx1, double fy1, DeviceColor c, int thickness) {
    int x0 = static_cast<int>(std::lround(fx0));
    int y0 = static_cast<int>(std::lround(fy0));
    int x1 = static_cast<int>(std::lround(fx1));
    int y1 = static_cast<int>(std::lround(fy1));
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      splat(x0, y0, c, thickness);
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

 private:
  void splat(int x, int y, DeviceColor c, int thickness) {
    int half = thickness / 2;
    for (int oy = -half; oy <= half; ++oy) {
      for (int ox = -half; ox <= half; ++ox) set(x + ox, y + oy, c);
    }
  }

  void set(int x, int y, DeviceColor c) {
    if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
    unsigned char* p = img_.pixel(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  png::Image& img_;
};

struct GraphicsState {
  DeviceColor fill{0, 0, 0};
  DeviceColor stroke{0, 0, 0};
  double line_width = 1.0;
};

}  // namespace

// ---------------------------------------------------------------- document

struct Document::Impl {
  std::vector<unsigned char> bytes;
  std::string name;
  std::map<int, size_t> xref;  // object number -> byte offset
  Dict trailer;
  mutable std::map<int, IndirectObject> cache;

  struct Page {
    PageGeometry geom;
    std::vector<Ref> content_refs;
  };
  std::vector<Page> pages;

  const IndirectObject& object(int num) const {
    auto hit = cache.find(num);
    if (hit != cache.end()) return hit->second;
    auto at = xref.find(num);
    if (at == xref.end()) throw ValidationError("pdf: missing object " + std::to_string(num) + " in " + name);

    Lexer lex(bytes, at->second);
    std::string obj_num = lex.next_word();
    std::string gen_num = lex.next_word();
    if (!lex.try_keyword("obj")) {
      throw ValidationError("pdf: corrupt object header in " + name);
    }
    (void)obj_num;
    (void)gen_num;
    IndirectObject obj;
    ValueParser parser(lex);
    obj.value = parser.parse();
    if (lex.try_keyword("stream")) {
      if (!obj.value.is_dict()) throw ValidationError("pdf: stream without dictionary in " + name);
      // EOL after 'stream' keyword: CRLF or LF.
      size_t p = lex.pos();
      if (p < bytes.size() && bytes[p] == '\r') ++p;
      if (p < bytes.size() && bytes[p] == '\n') ++p;
      long length = static_cast<long>(resolve_number(obj.value.dict(), "/Length"));
      if (length < 0 || p + static_cast<size_t>(length) > bytes.size()) {
        throw ValidationError("pdf: stream length out of range in " + name);
      }
      obj.stream.assign(bytes.begin() + p, bytes.begin() + p + length);
      obj.has_stream = true;
    }
    return cache.emplace(num, std::move(obj)).first->second;
  }

  Value resolve(const Value& v) const {
    if (!v.is_ref()) return v;
    return object(v.ref().num).value;
  }

  double resolve_number(const Dict& dict, const std::string& key) const {
    auto it = dict.find(key);
    if (it == dict.end()) throw ValidationError("pdf: missing " + key + " in " + name);
    Value v = resolve(it->second);
    if (!v.is_number()) throw ValidationError("pdf: " + key + " is not numeric in " + name);
    return v.number();
  }

  std::vector<unsigned char> decoded_stream(const IndirectObject& obj) const {
    if (!obj.has_stream) throw ValidationError("pdf: object has no stream in " + name);
    const Dict& dict = obj.value.dict();
    auto filter = dict.find("/Filter");
    if (filter == dict.end()) return obj.stream;
    Value f = resolve(filter->second);
    std::vector<std::string> names;
    if (f.is_name_or_string()) {
      names.push_back(f.text());
    } else if (f.is_array()) {
      for (const auto& item : f.array()) names.push_back(resolve(item).text());
    }
    std::vector<unsigned char> data = obj.stream;
    for (const auto& fname : names) {
      if (fname == "/FlateDecode") {
        data = inflate_all(data, name);
      } else {
        throw ValidationError("pdf: unsupported filter " + fname + " in " + name);
      }
    }
    return data;
  }

  void load() {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "%PDF-", 5) != 0) {
      throw ValidationError("pdf: not a PDF file: " + name);
    }
    parse_xref_chain();
    collect_pages();
  }

  void parse_xref_chain() {
    // locate final startxref
    std::string tail(reinterpret_cast<const char*>(bytes.data()) +
                         (bytes.size() > 2048 ? bytes.size() - 2048 : 0),
                     std::min<size_t>(bytes.size(), 2048));
    size_t sx = tail.rfind("startxref");
    if (sx == std::string::npos) throw ValidationError("pdf: missing startxref in " + name);
    size_t base = bytes.size() - tail.size();
    Lexer lex(bytes, base + sx + 9);
    std::string off_word = lex.next_word();
    size_t offset = 0;
    try {
      offset = static_cast<size_t>(std::stoull(off_word));
    } catch (...) {
      throw ValidationError("pdf: malformed startxref in " + name);
    }

    // Walk /Prev chain; newest section wins for duplicate object numbers.
    std::optional<size_t> next = offset;
    bool first_trailer = true;
    int guard = 0;
    while (next && guard++ < 64) {
      size_t at = *next;
      next.reset();
      if (at >= bytes.size()) throw ValidationError("pdf: xref offset out of range in " + name);
      Lexer xl(bytes, at);
      if (!xl.try_keyword("xref")) {
        throw ValidationError("pdf: cross-reference streams unsupported (xref table expected) in " + name);
      }
      while (true) {
        if (xl.try_keyword("trailer")) break;
        std::string start_word = xl.next_word();
        std::string count_word = xl.next_word();
        if (start_word.empty() || count_word.empty()) {
          throw ValidationError("pdf: corrupt xref subsection in " + name);
        }
        int start = std::stoi(start_word);
        int count = std::stoi(count_word);
        for (int i = 0; i < count; ++i) {
          std::string f1 = xl.next_word();
          std::string f2 = xl.next_word();
          std::string kind = xl.next_word();
          if (f1.size() != 10 || f2.size() != 5 || kind.size() != 1) {
            throw ValidationError("pdf: corrupt xref entry in " + name);
          }
          if (kind == "n" && !xref.count(start + i)) {
            xref[start + i] = static_cast<size_t>(std::stoull(f1));
          }
        }
      }
      ValueParser tp(xl);
      Value t = tp.parse();
      if (!t.is_dict()) throw ValidationError("pdf: trailer is not a dictionary in " + name);
      if (first_trailer) {
        trailer = t.dict();
        first_trailer = false;
      }
      auto prev = t.dict().find("/Prev");
      if (prev != t.dict().end() && prev->second.is_number()) {
        next = static_cast<size_t>(prev->second.number());
      }
    }
  }

  void collect_pages() {
    auto root_it = trailer.find("/Root");
    if (root_it == trailer.end()) throw ValidationError("pdf: trailer missing /Root in " + name);
    Value catalog = resolve(root_it->second);
    if (!catalog.is_dict()) throw ValidationError("pdf: catalog missing in " + name);
    auto pages_it = catalog.dict().find("/Pages");
    if (pages_it == catalog.dict().end()) throw ValidationError("pdf: catalog missing /Pages in " + name);
    walk_page_node(resolve(pages_it->second), Value{});
  }

  void walk_page_node(const Value& node, const Value& inherited_media_box) {
    if (!node.is_dict()) throw ValidationError("pdf: malformed page tree node in " + name);
    const Dict& dict = node.dict();
    Value media_box = inherited_media_box;
    if (auto mb = dict.find("/MediaBox"); mb != dict.end()) media_box = resolve(mb->second);

    auto type_it = dict.find("/Type");
    std::string type = type_it != dict.end() ? resolve(type_it->second).text() : "";
    if (type == "/Pages" || dict.count("/Kids")) {
      auto kids = dict.find("/Kids");
      if (kids == dict.end()) throw ValidationError("pdf: pages node without /Kids in " + name);
      Value arr = resolve(kids->second);
      if (!arr.is_array()) throw ValidationError("pdf: /Kids is not an array in " + name);
      for (const auto& kid : arr.array()) walk_page_node(resolve(kid), media_box);
      return;
    }

    Page page;
    if (!media_box.is_array() || media_box.array().size() != 4) {
      throw ValidationError("pdf: page without usable /MediaBox in " + name);
    }
    double x0 = resolve(media_box.array()[0]).number();
    double y0 = resolve(media_box.array()[1]).number();
    double x1 = resolve(media_box.array()[2]).number();
    double y1 = resolve(media_box.array()[3]).number();
    page.geom.width_pt = std::abs(x1 - x0);
    page.geom.height_pt = std::abs(y1 - y0);
    if (page.geom.width_pt <= 0 || page.geom.height_pt <= 0) {
      throw ValidationError("pdf: degenerate /MediaBox in " + name);
    }
    if (auto contents = dict.find("/Contents"); contents != dict.end()) {
      if (contents->second.is_ref()) {
        page.content_refs.push_back(contents->second.ref());
      } else {
        Value arr = resolve(contents->second);
        if (arr.is_array()) {
          for (const auto& item : arr.array()) {
            if (item.is_ref()) page.content_refs.push_back(item.ref());
          }
        }
      }
    }
    pages.push_back(std::move(page));
  }
};

Document::Document() : impl_(std::make_unique<Impl>()) {}
Document::~Document() = default;
Document::Document(Document&&) noexcept = default;
Document& Document::operator=(Document&&) noexcept = default;

Document Document::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pdf: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return from_bytes(std::move(bytes), path.filename().string());
}

Document Document::from_bytes(std::vector<unsigned char> bytes, std::string source_name) {
  Document doc;
  doc.impl_->bytes = std::move(bytes);
  doc.impl_->name = std::move(source_name);
  doc.impl_->load();
  return doc;
}

int Document::page_count() const { return static_cast<int>(impl_->pages.size()); }

PageGeometry Document::page_geometry(int index) const {
  if (index < 0 || index >= page_count()) throw ValidationError("pdf: page index out of range");
  return impl_->pages[index].geom;
}

std::string Document::page_content(int index) const {
  if (index < 0 || index >= page_count()) throw ValidationError("pdf: page index out of range");
  std::string content;
  for (Ref ref : impl_->pages[index].content_refs) {
    auto data = impl_->decoded_stream(impl_->object(ref.num));
    content.append(reinterpret_cast<const char*>(data.data()), data.size());
    content.push_back('\n');
  }
  return content;
}

int pixel_extent(double extent_pt, double scale) {
  return static_cast<int>(std::ceil(extent_pt * scale - 1e-6));
}

png::Image Document::render_page(int index, double scale) const {
  PageGeometry geom = page_geometry(index);
  int width = pixel_extent(geom.width_pt, scale);
  int height = pixel_extent(geom.height_pt, scale);
  png::Image img = png::make_image(width, height);
  Raster raster(img);

  auto dev_x = [&](double pt) { return pt * scale; };
  auto dev_y = [&](double pt) { return height - pt * scale; };

  std::string content = page_content(index);
  std::vector<unsigned char> buf(content.begin(), content.end());
  Lexer lex(buf, 0);

  GraphicsState gs;
  std::vector<GraphicsState> gs_stack;
  std::vector<double> operands;
  std::vector<std::pair<double, double>> path;       // current subpath, point space
  std::vector<std::vector<std::pair<double, double>>> subpaths;
  std::vector<std::array<double, 4>> rects;          // x, y, w, h

  auto flush_path = [&] {
    if (!path.empty()) subpaths.push_back(std::move(path));
    path.clear();
  };
  auto clear_path = [&] {
    path.clear();
    subpaths.clear();
    rects.clear();
  };
  auto pop_n = [&](size_t n) -> bool {
    if (operands.size() < n) {
      operands.clear();
      return false;
    }
    return true;
  };
  auto stroke_subpaths = [&] {
    flush_path();
    int thickness = std::max(1, static_cast<int>(std::lround(gs.line_width * scale)));
    for (const auto& sp : subpaths) {
      for (size_t i = 1; i < sp.size(); ++i) {
        raster.line(dev_x(sp[i - 1].first), dev_y(sp[i - 1].second), dev_x(sp[i].first),
                    dev_y(sp[i].second), gs.stroke, thickness);
      }
    }
    for (const auto& r : rects) {
      double x0 = dev_x(r[0]), y0 = dev_y(r[1]);
      double x1 = dev_x(r[0] + r[2]), y1 = dev_y(r[1] + r[3]);
      raster.line(x0, y0, x1, y0, gs.stroke, thickness);
      raster.line(x1, y0, x1, y1, gs.stroke, thickness);
      raster.line(x1, y1, x0, y1, gs.stroke, thickness);
      raster.line(x0, y1, x0, y0, gs.stroke, thickness);
    }
  };

  while (!lex.eof()) {
    unsigned char c = lex.peek();
    if (c == '/' || c == '(' || c == '<' || c == '[') {
      ValueParser vp(lex);
      vp.parse();  // names/strings/arrays are operands we do not draw with
      continue;
    }
    std::string word = lex.next_word();
    if (word.empty()) {
      lex.seek(lex.pos() + 1);
      continue;
    }
    char* end = nullptr;
    double num = std::strtod(word.c_str(), &end);
    if (end != word.c_str() && *end == '\0') {
      operands.push_back(num);
      continue;
    }

    if (word == "q") {
      gs_stack.push_back(gs);
    } else if (word == "Q") {
      if (!gs_stack.empty()) {
        gs = gs_stack.back();
        gs_stack.pop_back();
      }
    } else if (word == "rg") {
      if (pop_n(3)) {
        gs.fill = {to_byte(operands[operands.size() - 3]), to_byte(operands[operands.size() - 2]),
                   to_byte(operands[operands.size() - 1])};
      }
    } else if (word == "RG") {
      if (pop_n(3)) {
        gs.stroke = {to_byte(operands[operands.size() - 3]), to_byte(operands[operands.size() - 2]),
                     to_byte(operands[operands.size() - 1])};
      }
    } else if (word == "g") {
      if (pop_n(1)) gs.fill = {to_byte(operands.back()), to_byte(operands.back()), to_byte(operands.back())};
    } else if (word == "G") {
      if (pop_n(1)) gs.stroke = {to_byte(operands.back()), to_byte(operands.back()), to_byte(operands.back())};
    } else if (word == "w") {
      if (pop_n(1)) gs.line_width = operands.back();
    } else if (word == "re") {
      if (pop_n(4)) {
        size_t n = operands.size();
        rects.push_back({operands[n - 4], operands[n - 3], operands[n - 2], operands[n - 1]});
      }
    } else if (word == "m") {
      if (pop_n(2)) {
        flush_path();
        path.push_back({operands[operands.size() - 2], operands[operands.size() - 1]});
      }
    } else if (word == "l") {
      if (pop_n(2)) path.push_back({operands[operands.size() - 2], operands[operands.size() - 1]});
    } else if (word == "h") {
      if (path.size() > 1) path.push_back(path.front());
    } else if (word == "f" || word == "f*" || word == "F" || word == "b" || word == "B") {
      for (const auto& r : rects) {
        raster.fill_rect(dev_x(r[0]), dev_y(r[1]), dev_x(r[0] + r[2]), dev_y(r[1] + r[3]), gs.fill);
      }
      if (word == "b" || word == "B") stroke_subpaths();
      clear_path();
    } else if (word == "S" || word == "s") {
      if (word == "s" && path.size() > 1) path.push_back(path.front());
      stroke_subpaths();
      clear_path();
    } else if (word == "n") {
      clear_path();
    } else if (word == "BT") {
      // skip text blocks wholesale
      while (!lex.eof()) {
        if (lex.try_keyword("ET")) break;
        lex.seek(lex.pos() + 1);
      }
      operands.clear();
    } else {
      operands.clear();  // unsupported operator: drop its operands
      continue;
    }
    operands.clear();
  }
  return img;
}

// ---------------------------------------------------------------- builder

Builder& Builder::add_page(double width_pt, double height_pt, std::string content_ops) {
  if (width_pt <= 0 || height_pt <= 0) throw ValidationError("pdf: page size must be positive");
  pages_.push_back({width_pt, height_pt, std::move(content_ops)});
  return *this;
}

std::vector<unsigned char> Builder::build(bool compress_streams) const {
  std::ostringstream out;
  std::vector<size_t> offsets;  // offsets[i] = offset of object i+1

  auto begin_obj = [&](int num) {
    offsets.push_back(static_cast<size_t>(out.tellp()));
    out << num << " 0 obj\n";
  };

  out << "%PDF-1.4\n";

  // object numbering: 1 catalog, 2 pages, then (page, content) pairs
  int n_pages = static_cast<int>(pages_.size());
  begin_obj(1);
  out << "<< /Type /Catalog /Pages 2 0 R >>\nendobj\n";

  begin_obj(2);
  out << "<< /Type /Pages /Count " << n_pages << " /Kids [";
  for (int i = 0; i < n_pages; ++i) {
    out << (i ? " " : "") << (3 + 2 * i) << " 0 R";
  }
  out << "] >>\nendobj\n";

  for (int i = 0; i < n_pages; ++i) {
    const Page& page = pages_[i];
    int page_num = 3 + 2 * i;
    int content_num = page_num + 1;

    begin_obj(page_num);
    out << "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " << page.width_pt << " "
        << page.height_pt << "] /Contents " << content_num << " 0 R /Resources << >> >>\nendobj\n";

    std::string data = page.content;
    begin_obj(content_num);
    if (compress_streams) {
      auto compressed = deflate_all(std::span<const unsigned char>(
          reinterpret_cast<const unsigned char*>(data.data()), data.size()));
      out << "<< /Length " << compressed.size() << " /Filter /FlateDecode >>\nstream\n";
      out.write(reinterpret_cast<const char*>(compressed.data()),
                static_cast<std::streamsize>(compressed.size()));
      out << "\nendstream\nendobj\n";
    } else {
      out << "<< /Length " << data.size() << " >>\nstream\n" << data << "\nendstream\nendobj\n";
    }
  }

  size_t xref_offset = static_cast<size_t>(out.tellp());
  int n_objects = static_cast<int>(offsets.size());
  out << "xref\n0 " << (n_objects + 1) << "\n";
  out << "0000000000 65535 f \n";
  for (size_t off : offsets) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
    out << buf;
  }
  out << "trailer\n<< /Size " << (n_objects + 1) << " /Root 1 0 R >>\nstartxref\n"
      << xref_offset << "\n%%EOF\n";

  std::string s = out.str();
  return std::vector<unsigned char>(s.begin(), s.end());
}

void Builder::save(const std::filesystem::path& path, bool compress_streams) const {
  auto bytes = build(compress_streams);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("pdf: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("pdf: write failed for " + path.string());
}

namespace ops {

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}
}  // namespace

std::string fill_rect(double x, double y, double w, double h, double r, double g, double b) {
  std::ostringstream os;
  os << fmt(r) << " " << fmt(g) << " " << fmt(b) << " rg\n"
     << fmt(x) << " " << fmt(y) << " " << fmt(w) << " " << fmt(h) << " re\nf\n";
  return os.str();
}

std::string stroke_line(double x1, double y1, double x2, double y2, double r, double g, double b,
                        double width) {
  std::ostringstream os;
  os << fmt(r) << " " << fmt(g) << " " << fmt(b) << " RG\n" << fmt(width) << " w\n"
     << fmt(x1) << " " << fmt(y1) << " m\n" << fmt(x2) << " " << fmt(y2) << " l\nS\n";
  return os.str();
}

std::string stroke_polyline(const std::vector<std::pair<double, double>>& points, double r,
                            double g, double b, double width) {
  if (points.size() < 2) return "";
  std::ostringstream os;
  os << fmt(r) << " " << fmt(g) << " " << fmt(b) << " RG\n" << fmt(width) << " w\n";
  os << fmt(points[0].first) << " " << fmt(points[0].second) << " m\n";
  for (size_t i = 1; i < points.size(); ++i) {
    os << fmt(points[i].first) << " " << fmt(points[i].second) << " l\n";
  }
  os << "S\n";
  return os.str();
}

}  // namespace ops

}  // namespace figmine::pdf
