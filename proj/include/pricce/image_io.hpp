#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pricce/image.hpp"

namespace pricce {

/// Reads 8-bit gray or RGB PNG, or 24-bit uncompressed BMP. 16-bit,
/// paletted and alpha-carrying files are rejected with IoError.
RasterImage read_image(const std::filesystem::path& path);

/// Format chosen from the extension (.png or .bmp); written atomically.
void write_image(const std::filesystem::path& path, const RasterImage& img);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
std::vector<std::uint8_t> encode_bmp(const RasterImage& img);
RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
RasterImage decode_bmp(const std::vector<std::uint8_t>& bytes);

}  // namespace pricce
