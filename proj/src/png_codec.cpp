#include "figmine/png_codec.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "figmine/errors.hpp"

namespace figmine::png {

namespace {

constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

uint32_t get_u32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  std::span<const unsigned char> payload) {
  put_u32(out, static_cast<uint32_t>(payload.size()));
  size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  uint32_t crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32(out, crc);
}

std::vector<unsigned char> zlib_compress(std::span<const unsigned char> data) {
  uLongf bound = compressBound(static_cast<uLong>(data.size()));
  std::vector<unsigned char> out(bound);
  if (compress2(out.data(), &bound, data.data(), static_cast<uLong>(data.size()), 6) != Z_OK) {
    throw ValidationError("png: zlib compression failed");
  }
  out.resize(bound);
  return out;
}

std::vector<unsigned char> zlib_decompress(std::span<const unsigned char> data,
                                           size_t expected_size) {
  std::vector<unsigned char> out(expected_size);
  uLongf dest_len = static_cast<uLongf>(expected_size);
  int rc = uncompress(out.data(), &dest_len, data.data(), static_cast<uLong>(data.size()));
  if (rc != Z_OK || dest_len != expected_size) {
    throw ValidationError("png: corrupt compressed image data");
  }
  return out;
}

int channels_for(int color_type) {
  switch (color_type) {
    case 0: return 1;  // greyscale
    case 2: return 3;  // RGB
    case 6: return 4;  // RGBA
    default: return 0;
  }
}

unsigned char paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<unsigned char>(a);
  if (pb <= pc) return static_cast<unsigned char>(b);
  return static_cast<unsigned char>(c);
}

struct ChunkView {
  std::string type;
  std::span<const unsigned char> payload;
};

std::vector<ChunkView> parse_chunks(std::span<const unsigned char> bytes) {
  if (!looks_like_png(bytes)) throw ValidationError("png: bad signature");
  std::vector<ChunkView> chunks;
  size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    uint32_t len = get_u32(bytes.data() + pos);
    if (pos + 12 + len > bytes.size()) throw ValidationError("png: truncated chunk");
    ChunkView c;
    c.type.assign(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
    c.payload = bytes.subspan(pos + 8, len);
    uint32_t stored_crc = get_u32(bytes.data() + pos + 8 + len);
    uint32_t computed = crc32(0L, bytes.data() + pos + 4, len + 4);
    if (stored_crc != computed) throw ValidationError("png: chunk CRC mismatch (" + c.type + ")");
    chunks.push_back(c);
    pos += 12 + len;
    if (c.type == "IEND") break;
  }
  if (chunks.empty() || chunks.front().type != "IHDR") throw ValidationError("png: missing IHDR");
  if (chunks.back().type != "IEND") throw ValidationError("png: missing IEND");
  return chunks;
}

Info info_from_ihdr(std::span<const unsigned char> ihdr) {
  if (ihdr.size() != 13) throw ValidationError("png: malformed IHDR");
  Info info;
  info.width = static_cast<int>(get_u32(ihdr.data()));
  info.height = static_cast<int>(get_u32(ihdr.data() + 4));
  info.bit_depth = ihdr[8];
  info.color_type = ihdr[9];
  if (info.width <= 0 || info.height <= 0) throw ValidationError("png: nonpositive dimensions");
  if (ihdr[12] != 0) throw ValidationError("png: interlaced images unsupported");
  return info;
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("png: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

Image make_image(int width, int height, unsigned char r, unsigned char g, unsigned char b) {
  if (width <= 0 || height <= 0) throw ValidationError("png: image dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(static_cast<size_t>(width) * height * 3);
  for (size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

bool looks_like_png(std::span<const unsigned char> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSignature, 8) == 0;
}

std::vector<unsigned char> encode(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<size_t>(image.width) * image.height * 3) {
    throw ValidationError("png: inconsistent image buffer");
  }
  std::vector<unsigned char> out(kSignature, kSignature + 8);

  std::vector<unsigned char> ihdr;
  put_u32(ihdr, static_cast<uint32_t>(image.width));
  put_u32(ihdr, static_cast<uint32_t>(image.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  append_chunk(out, "IHDR", ihdr);

  size_t stride = static_cast<size_t>(image.width) * 3;
  std::vector<unsigned char> raw;
  raw.reserve((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    const unsigned char* row = image.rgb.data() + y * stride;
    raw.insert(raw.end(), row, row + stride);
  }
  append_chunk(out, "IDAT", zlib_compress(raw));
  append_chunk(out, "IEND", {});
  return out;
}

Info read_info(std::span<const unsigned char> bytes) {
  auto chunks = parse_chunks(bytes);
  return info_from_ihdr(chunks.front().payload);
}

Image decode(std::span<const unsigned char> bytes) {
  auto chunks = parse_chunks(bytes);
  Info info = info_from_ihdr(chunks.front().payload);
  int channels = channels_for(info.color_type);
  if (info.bit_depth != 8 || channels == 0) {
    throw ValidationError("png: only 8-bit greyscale/RGB/RGBA supported");
  }

  std::vector<unsigned char> compressed;
  bool seen_idat = false;
  for (const auto& c : chunks) {
    if (c.type == "IDAT") {
      seen_idat = true;
      compressed.insert(compressed.end(), c.payload.begin(), c.payload.end());
    }
  }
  if (!seen_idat) throw ValidationError("png: missing IDAT");

  size_t stride = static_cast<size_t>(info.width) * channels;
  auto raw = zlib_decompress(compressed, (stride + 1) * info.height);

  std::vector<unsigned char> prev(stride, 0);
  std::vector<unsigned char> cur(stride, 0);
  Image img = make_image(info.width, info.height);
  for (int y = 0; y < info.height; ++y) {
    const unsigned char* src = raw.data() + static_cast<size_t>(y) * (stride + 1);
    unsigned char filter = src[0];
    const unsigned char* line = src + 1;
    for (size_t i = 0; i < stride; ++i) {
      int a = i >= static_cast<size_t>(channels) ? cur[i - channels] : 0;
      int b = prev[i];
      int c = i >= static_cast<size_t>(channels) ? prev[i - channels] : 0;
      int x = line[i];
      switch (filter) {
        case 0: cur[i] = static_cast<unsigned char>(x); break;
        case 1: cur[i] = static_cast<unsigned char>(x + a); break;
        case 2: cur[i] = static_cast<unsigned char>(x + b); break;
        case 3: cur[i] = static_cast<unsigned char>(x + (a + b) / 2); break;
        case 4: cur[i] = static_cast<unsigned char>(x + paeth(a, b, c)); break;
        default: throw ValidationError("png: unknown scanline filter");
      }
    }
    for (int x = 0; x < info.width; ++x) {
      unsigned char* dst = img.pixel(x, y);
      const unsigned char* s = cur.data() + static_cast<size_t>(x) * channels;
      if (channels == 1) {
        dst[0] = dst[1] = dst[2] = s[0];
      } else {
        dst[0] = s[0];
        dst[1] = s[1];
        dst[2] = s[2];
      }
    }
    std::swap(prev, cur);
  }
  return img;
}

void write_file(const std::filesystem::path& path, const Image& image) {
  auto bytes = encode(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("png: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("png: write failed for " + path.string());
}

Image read_file(const std::filesystem::path& path) { return decode(read_all(path)); }

Info read_file_info(const std::filesystem::path& path) { return read_info(read_all(path)); }

}  // namespace figmine::png
