#include "pricce/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pricce/error.hpp"

namespace pricce {

namespace {

void check_raster_shape(int width, int height, int channels, std::size_t len) {
  if (channels != 1 && channels != 3) {
    throw ParameterError("raster must have 1 or 3 channels, got " + std::to_string(channels));
  }
  if (width < kMinImageSide || height < kMinImageSide) {
    throw DimensionError("raster " + std::to_string(width) + "x" + std::to_string(height) +
                         " is below the " + std::to_string(kMinImageSide) + "x" +
                         std::to_string(kMinImageSide) + " minimum");
  }
  if (len != static_cast<std::size_t>(width) * height * channels) {
    throw DimensionError("raster data length " + std::to_string(len) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height) + "x" +
                         std::to_string(channels));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_raster_shape(width_, height_, channels_, data_.size());
}

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_raster_shape(width, height, channels,
                     static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage RasterImage::rgb(int width, int height, std::uint8_t r, std::uint8_t g,
                             std::uint8_t b) {
  RasterImage img(width, height, 3);
  auto d = img.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    d[i] = r;
    d[i + 1] = g;
    d[i + 2] = b;
  }
  return img;
}

FloatPlane::FloatPlane(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DimensionError("negative plane dimensions");
  if (!std::isfinite(fill)) throw ParameterError("plane fill value must be finite");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

FloatPlane::FloatPlane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw DimensionError("negative plane dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("plane data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ParameterError("plane contains a non-finite sample");
  }
}

double FloatPlane::clamped(int x, int y) const noexcept {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return (*this)(x, y);
}

std::array<double, 256> Histogram256::pdf() const noexcept {
  std::array<double, 256> p{};
  for (int k = 0; k < 256; ++k) p[static_cast<std::size_t>(k)] = pdf(k);
  return p;
}

std::array<double, 256> Histogram256::cdf() const noexcept {
  std::array<double, 256> c{};
  std::uint64_t run = 0;
  for (std::size_t k = 0; k < 256; ++k) {
    run += counts[k];
    c[k] = total == 0 ? 0.0 : static_cast<double>(run) / total;
  }
  return c;
}

FloatPlane to_gray(const RasterImage& img) {
  FloatPlane out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  if (img.channels() == 1) {
    std::transform(src.begin(), src.end(), dst.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    return out;
  }
  // Integer weights keep equal-channel pixels exact.
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const int acc = 299 * src[3 * i] + 587 * src[3 * i + 1] + 114 * src[3 * i + 2];
    dst[i] = acc / 1000.0;
  }
  return out;
}

FloatPlane channel_plane(const RasterImage& img, int channel) {
  if (channel < 0 || channel >= img.channels()) {
    throw ParameterError("channel index " + std::to_string(channel) + " out of range");
  }
  FloatPlane out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  const auto stride = static_cast<std::size_t>(img.channels());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * stride + channel];
  return out;
}

std::uint8_t to_u8(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::nearbyint(v));
}

RasterImage gray_to_rgb(const FloatPlane& plane) {
  RasterImage out(plane.width(), plane.height(), 3);
  auto src = plane.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = to_u8(src[i]);
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = v;
  }
  return out;
}

RasterImage planes_to_rgb(const FloatPlane& r, const FloatPlane& g, const FloatPlane& b) {
  if (!r.same_shape(g) || !r.same_shape(b)) throw DimensionError("channel planes differ in size");
  RasterImage out(r.width(), r.height(), 3);
  auto dst = out.data();
  const auto rs = r.data(), gs = g.data(), bs = b.data();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    dst[3 * i] = to_u8(rs[i]);
    dst[3 * i + 1] = to_u8(gs[i]);
    dst[3 * i + 2] = to_u8(bs[i]);
  }
  return out;
}

RasterImage ensure_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  std::vector<std::uint8_t> data(img.pixel_count() * 3);
  auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = src[i];
  return RasterImage(img.width(), img.height(), 3, std::move(data));
}

Histogram256 histogram(const FloatPlane& plane) {
  Histogram256 h;
  for (double v : plane.data()) {
    const double r = std::nearbyint(v);
    if (!(r >= 0.0 && r <= 255.0)) {
      throw ParameterError("sample " + std::to_string(v) + " is outside [0,255]");
    }
    ++h.counts[static_cast<std::size_t>(r)];
  }
  h.total = plane.size();
  return h;
}

Histogram256 histogram(std::span<const std::uint8_t> samples) {
  Histogram256 h;
  for (auto v : samples) ++h.counts[v];
  h.total = samples.size();
  return h;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  if (radius < 1) throw ParameterError("gaussian radius must be >= 1, got " + std::to_string(radius));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (auto& v : k) v /= sum;
  return k;
}

FloatPlane separable_filter(const FloatPlane& plane, std::span<const double> kernel) {
  if (kernel.size() % 2 == 0) throw ParameterError("filter kernel length must be odd");
  const int r = static_cast<int>(kernel.size() / 2);
  const int w = plane.width();
  const int h = plane.height();
  if (w == 0 || h == 0) return plane;

  // prefix[i] = sum of kernel[0..i-1]; taps falling outside the image are
  // folded onto the edge sample in one multiply.
  std::vector<double> prefix(kernel.size() + 1, 0.0);
  for (std::size_t i = 0; i < kernel.size(); ++i) prefix[i + 1] = prefix[i] + kernel[i];
  const double total = prefix.back();

  FloatPlane tmp(w, h);
  for (int y = 0; y < h; ++y) {
    const double* row = plane.data().data() + static_cast<std::size_t>(y) * w;
    double* out = tmp.data().data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(-r, -x);
      const int hi = std::min(r, w - 1 - x);
      double s = 0.0;
      for (int t = lo; t <= hi; ++t) s += kernel[static_cast<std::size_t>(t + r)] * row[x + t];
      s += prefix[static_cast<std::size_t>(lo + r)] * row[0];
      s += (total - prefix[static_cast<std::size_t>(hi + r + 1)]) * row[w - 1];
      out[x] = s;
    }
  }

  FloatPlane dst(w, h);
  const double* src = tmp.data().data();
  for (int y = 0; y < h; ++y) {
    double* out = dst.data().data() + static_cast<std::size_t>(y) * w;
    const int lo = std::max(-r, -y);
    const int hi = std::min(r, h - 1 - y);
    for (int t = lo; t <= hi; ++t) {
      const double k = kernel[static_cast<std::size_t>(t + r)];
      const double* in = src + static_cast<std::size_t>(y + t) * w;
      for (int x = 0; x < w; ++x) out[x] += k * in[x];
    }
    const double top = prefix[static_cast<std::size_t>(lo + r)];
    const double bottom = total - prefix[static_cast<std::size_t>(hi + r + 1)];
    if (top != 0.0) {
      for (int x = 0; x < w; ++x) out[x] += top * src[x];
    }
    if (bottom != 0.0) {
      const double* last = src + static_cast<std::size_t>(h - 1) * w;
      for (int x = 0; x < w; ++x) out[x] += bottom * last[x];
    }
  }
  return dst;
}

FloatPlane gaussian_filter(const FloatPlane& plane, double sigma, int radius) {
  const auto k = gaussian_kernel(sigma, radius);
  return separable_filter(plane, k);
}

FloatPlane downsample2(const FloatPlane& plane) {
  if (plane.width() < 2 || plane.height() < 2) {
    throw DimensionError("downsample2 needs at least 2x2, got " + std::to_string(plane.width()) +
                         "x" + std::to_string(plane.height()));
  }
  const int w = plane.width() / 2;
  const int h = plane.height() / 2;
  FloatPlane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(x, y) = 0.25 * (plane(2 * x, 2 * y) + plane(2 * x + 1, 2 * y) + plane(2 * x, 2 * y + 1) +
                          plane(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

double mean(const FloatPlane& plane) noexcept {
  if (plane.empty()) return 0.0;
  return std::accumulate(plane.data().begin(), plane.data().end(), 0.0) /
         static_cast<double>(plane.size());
}

}  // namespace pricce
