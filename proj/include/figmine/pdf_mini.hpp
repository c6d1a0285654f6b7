#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "figmine/png_codec.hpp"

// Self-contained PDF subset: classic cross-reference tables, FlateDecode
// streams, and a content-stream interpreter covering rectangle fills and
// straight-line strokes. Enough to rasterize the PDFs produced by Builder
// and by comparable simple generators; anything outside the subset fails
// with a ValidationError naming the construct.
namespace figmine::pdf {

struct PageGeometry {
  double width_pt = 0;
  double height_pt = 0;
};

class Document {
 public:
  static Document open(const std::filesystem::path& path);
  static Document from_bytes(std::vector<unsigned char> bytes, std::string source_name);

  int page_count() const;
  PageGeometry page_geometry(int index) const;
  // Decoded, concatenated content stream of one page.
  std::string page_content(int index) const;

  // Rasterize a page at `scale` device pixels per point. White background;
  // pixel dimensions are ceil(extent_pt * scale).
  png::Image render_page(int index, double scale) const;

  ~Document();
  Document(Document&&) noexcept;
  Document& operator=(Document&&) noexcept;
  Document(const Document&) = delete;
  Document& operator=(const Document&) = delete;

 private:
  Document();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Device-pixel extent for one point-space extent, matching render_page.
int pixel_extent(double extent_pt, double scale);

// Writes PDFs within the same subset the reader accepts.
class Builder {
 public:
  Builder& add_page(double width_pt, double height_pt, std::string content_ops);
  // Flate-compresses content streams unless disabled.
  std::vector<unsigned char> build(bool compress_streams = true) const;
  void save(const std::filesystem::path& path, bool compress_streams = true) const;

 private:
  struct Page {
    double width_pt;
    double height_pt;
    std::string content;
  };
  std::vector<Page> pages_;
};

// Content-stream snippets for Builder pages. Coordinates in points,
// origin bottom-left, colors in [0,1].
namespace ops {
std::string fill_rect(double x, double y, double w, double h, double r, double g, double b);
std::string stroke_line(double x1, double y1, double x2, double y2, double r, double g, double b,
                        double width = 1.0);
std::string stroke_polyline(const std::vector<std::pair<double, double>>& points, double r,
                            double g, double b, double width = 1.0);
}  // namespace ops

}  // namespace figmine::pdf
