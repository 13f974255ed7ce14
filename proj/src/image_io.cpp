#include "pricce/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>

#include <png.h>

#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"

namespace pricce {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

std::uint32_t rd32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return b[off] | (b[off + 1] << 8) | (b[off + 2] << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}
std::uint16_t rd16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}
void wr32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void wr16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

// The simplified API would silently convert these formats, so the header is
// inspected first.
void reject_unsupported_png(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 33 || std::memcmp(bytes.data(), kSig, 8) != 0 ||
      std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
    throw IoError("not a PNG file");
  }
  const int bit_depth = bytes[24];
  const int color_type = bytes[25];
  if (bit_depth != 8) {
    throw IoError("unsupported PNG bit depth " + std::to_string(bit_depth) + " (only 8-bit)");
  }
  switch (color_type) {
    case 0:  // gray
    case 2:  // rgb
      return;
    case 3:
      throw IoError("paletted PNG is not supported");
    case 4:
    case 6:
      throw IoError("PNG with alpha channel is not supported");
    default:
      throw IoError("unknown PNG color type " + std::to_string(color_type));
  }
}

}  // namespace

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  reject_unsupported_png(bytes);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError(std::string("PNG decode failed: ") + image.message);
  }
  const int channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("PNG decode failed: " + msg);
  }
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                     std::move(data));
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

RasterImage decode_bmp(const std::vector<std::uint8_t>& b) {
  if (b.size() < 54 || b[0] != 'B' || b[1] != 'M') throw IoError("not a BMP file");
  const std::uint32_t offset = rd32(b, 10);
  const std::uint32_t header_size = rd32(b, 14);
  if (header_size < 40) throw IoError("unsupported BMP header (OS/2 core header)");
  const auto width = static_cast<std::int32_t>(rd32(b, 18));
  const auto raw_height = static_cast<std::int32_t>(rd32(b, 22));
  const std::uint16_t bpp = rd16(b, 28);
  const std::uint32_t compression = rd32(b, 30);
  if (bpp <= 8) throw IoError("paletted BMP is not supported");
  if (bpp != 24) throw IoError("unsupported BMP bit depth " + std::to_string(bpp) + " (only 24-bit)");
  if (compression != 0) throw IoError("compressed BMP is not supported");
  if (width <= 0 || raw_height == 0) throw IoError("invalid BMP dimensions");
  const bool bottom_up = raw_height > 0;
  const int height = bottom_up ? raw_height : -raw_height;
  const std::size_t stride = (static_cast<std::size_t>(width) * 3 + 3) & ~std::size_t{3};
  if (offset + stride * height > b.size()) throw IoError("truncated BMP pixel data");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    const int src_row = bottom_up ? height - 1 - y : y;
    const std::uint8_t* src = b.data() + offset + stride * src_row;
    std::uint8_t* dst = data.data() + static_cast<std::size_t>(y) * width * 3;
    for (int x = 0; x < width; ++x) {
      dst[3 * x] = src[3 * x + 2];
      dst[3 * x + 1] = src[3 * x + 1];
      dst[3 * x + 2] = src[3 * x];
    }
  }
  return RasterImage(width, height, 3, std::move(data));
}

std::vector<std::uint8_t> encode_bmp(const RasterImage& img) {
  const RasterImage rgb = ensure_rgb(img);
  const int w = rgb.width();
  const int h = rgb.height();
  const std::size_t stride = (static_cast<std::size_t>(w) * 3 + 3) & ~std::size_t{3};
  const auto pixel_bytes = static_cast<std::uint32_t>(stride * h);
  std::vector<std::uint8_t> out;
  out.reserve(54 + pixel_bytes);
  out.push_back('B');
  out.push_back('M');
  wr32(out, 54 + pixel_bytes);
  wr32(out, 0);
  wr32(out, 54);
  wr32(out, 40);
  wr32(out, static_cast<std::uint32_t>(w));
  wr32(out, static_cast<std::uint32_t>(h));
  wr16(out, 1);
  wr16(out, 24);
  wr32(out, 0);
  wr32(out, pixel_bytes);
  wr32(out, 2835);
  wr32(out, 2835);
  wr32(out, 0);
  wr32(out, 0);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      out.push_back(rgb.at(x, y, 2));
      out.push_back(rgb.at(x, y, 1));
      out.push_back(rgb.at(x, y, 0));
    }
    for (std::size_t p = static_cast<std::size_t>(w) * 3; p < stride; ++p) out.push_back(0);
  }
  return out;
}

RasterImage read_image(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') return decode_png(bytes);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  throw IoError(path.string() + ": unrecognized image format (expected PNG or BMP)");
}

void write_image(const fs::path& path, const RasterImage& img) {
  const auto ext = lower_ext(path);
  if (ext == ".png") {
    atomic_write(path, encode_png(img));
  } else if (ext == ".bmp") {
    atomic_write(path, encode_bmp(img));
  } else {
    throw IoError(path.string() + ": output extension must be .png or .bmp");
  }
}

}  // namespace pricce
