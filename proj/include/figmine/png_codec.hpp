#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace figmine::png {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;

  unsigned char* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<size_t>(y) * width + x); }
  const unsigned char* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
};

Image make_image(int width, int height, unsigned char r = 255, unsigned char g = 255,
                 unsigned char b = 255);

struct Info {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

bool looks_like_png(std::span<const unsigned char> bytes);

std::vector<unsigned char> encode(const Image& image);
// Accepts 8-bit greyscale, RGB and RGBA (alpha dropped), non-interlaced.
Image decode(std::span<const unsigned char> bytes);
Info read_info(std::span<const unsigned char> bytes);

void write_file(const std::filesystem::path& path, const Image& image);
Image read_file(const std::filesystem::path& path);
Info read_file_info(const std::filesystem::path& path);

}  // namespace figmine::png
