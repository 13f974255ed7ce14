#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pricce {

/// Smallest accepted raster side. Multi-scale metrics need at least this.
inline constexpr int kMinImageSide = 16;

/// 8-bit raster, row-major, channels interleaved (1 = gray, 3 = RGB).
class RasterImage {
 public:
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);

  static RasterImage rgb(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool same_shape(const RasterImage& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> data_;
};

/// Single-channel real-valued working buffer. Samples are always finite.
class FloatPlane {
 public:
  FloatPlane() = default;
  FloatPlane(int width, int height, double fill = 0.0);
  FloatPlane(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  /// Edge-replicating access.
  double clamped(int x, int y) const noexcept;

  bool same_shape(const FloatPlane& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }
  friend bool operator==(const FloatPlane&, const FloatPlane&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  double pdf(int k) const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(counts[static_cast<std::size_t>(k)]) / total;
  }
  std::array<double, 256> pdf() const noexcept;
  std::array<double, 256> cdf() const noexcept;
};

/// Rec.601 luma, exact for equal channels. Gray images pass through.
FloatPlane to_gray(const RasterImage& img);

/// One channel of an interleaved raster as a plane.
FloatPlane channel_plane(const RasterImage& img, int channel);

/// Round-half-to-even then clip to [0,255].
std::uint8_t to_u8(double v) noexcept;

/// Gray plane replicated into an RGB raster (values rounded and clipped).
RasterImage gray_to_rgb(const FloatPlane& plane);
/// Three planes interleaved into an RGB raster (values rounded and clipped).
RasterImage planes_to_rgb(const FloatPlane& r, const FloatPlane& g, const FloatPlane& b);
/// 1-channel rasters are replicated; 3-channel rasters are returned as-is.
RasterImage ensure_rgb(const RasterImage& img);

/// Samples are binned by round-to-nearest, ties to even; values outside
/// [0,255] (after rounding) are rejected.
Histogram256 histogram(const FloatPlane& plane);
Histogram256 histogram(std::span<const std::uint8_t> samples);

/// Normalized 1-D Gaussian taps, index 0 is offset -radius.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable correlation with a normalized 1-D kernel, edge-replicated.
FloatPlane separable_filter(const FloatPlane& plane, std::span<const double> kernel);

FloatPlane gaussian_filter(const FloatPlane& plane, double sigma, int radius);

/// 2x2 average pooling; output side is floor(side / 2).
FloatPlane downsample2(const FloatPlane& plane);

double mean(const FloatPlane& plane) noexcept;

}  // namespace pricce
