// Histogram-domain enhancers: HE, DHE, BPDHE and the adaptive gamma of Cao.

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pricce/enhance.hpp"
#include "pricce/error.hpp"

namespace pricce {

namespace {

std::array<double, 256> as_counts(const Histogram256& h) {
  std::array<double, 256> c{};
  for (std::size_t k = 0; k < 256; ++k) c[k] = static_cast<double>(h.counts[k]);
  return c;
}

FloatPlane map_luma(const FloatPlane& luma, const std::array<double, 256>& lut) {
  FloatPlane out(luma.width(), luma.height());
  auto src = luma.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = lut[static_cast<std::size_t>(std::clamp(std::nearbyint(src[i]), 0.0, 255.0))];
  }
  return out;
}

RasterImage apply_lut_via_luma(const RasterImage& img, const std::array<double, 256>& lut) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane luma = to_gray(rgb);
  return apply_luma_ratio(rgb, luma, map_luma(luma, lut));
}

template <class Better>
std::vector<int> plateau_extrema(std::span<const double> h, Better better) {
  std::vector<int> out;
  const int n = static_cast<int>(h.size());
  int lo = 0;
  while (lo < n && h[static_cast<std::size_t>(lo)] <= 0.0) ++lo;
  int hi = n - 1;
  while (hi >= 0 && h[static_cast<std::size_t>(hi)] <= 0.0) --hi;
  if (lo >= hi) return out;
  int s = lo + 1;
  while (s < hi) {
    int e = s;
    while (e + 1 < hi && h[static_cast<std::size_t>(e + 1)] == h[static_cast<std::size_t>(s)]) ++e;
    const double v = h[static_cast<std::size_t>(s)];
    if (better(v, h[static_cast<std::size_t>(s - 1)]) && better(v, h[static_cast<std::size_t>(e + 1)])) {
      out.push_back((s + e) / 2);
    }
    s = e + 1;
  }
  return out;
}

}  // namespace

std::array<double, 256> equalization_lut(const Histogram256& hist) {
  const auto cdf = hist.cdf();
  std::array<double, 256> lut{};
  for (std::size_t k = 0; k < 256; ++k) lut[k] = std::nearbyint(255.0 * cdf[k]);
  return lut;
}

RasterImage apply_luma_ratio(const RasterImage& rgb_in, const FloatPlane& luma,
                             const FloatPlane& new_luma) {
  const RasterImage rgb = ensure_rgb(rgb_in);
  if (luma.width() != rgb.width() || luma.height() != rgb.height() || !luma.same_shape(new_luma)) {
    throw DimensionError("luma planes do not match the raster");
  }
  RasterImage out = rgb;
  auto src = rgb.data();
  auto dst = out.data();
  const auto y0 = luma.data();
  const auto y1 = new_luma.data();
  for (std::size_t i = 0; i < y0.size(); ++i) {
    if (y0[i] > 0.0) {
      const double scale = y1[i] / y0[i];
      for (std::size_t c = 0; c < 3; ++c) dst[3 * i + c] = to_u8(src[3 * i + c] * scale);
    } else {
      dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = to_u8(y1[i]);
    }
  }
  return out;
}

RasterImage he(const RasterImage& img) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane luma = to_gray(rgb);
  return apply_luma_ratio(rgb, luma, map_luma(luma, equalization_lut(histogram(luma))));
}

std::vector<double> moving_average(std::span<const double, 256> hist, int width) {
  if (width < 1) throw ParameterError("moving average width must be >= 1");
  const int half = width / 2;
  std::vector<double> out(256, 0.0);
  for (int k = 0; k < 256; ++k) {
    double s = 0.0;
    int n = 0;
    for (int t = k - half; t <= k + half; ++t) {
      if (t < 0 || t > 255) continue;
      s += hist[static_cast<std::size_t>(t)];
      ++n;
    }
    out[static_cast<std::size_t>(k)] = s / n;
  }
  return out;
}

std::vector<double> smooth_histogram_gaussian(std::span<const double, 256> hist, double sigma,
                                              int radius) {
  const auto k = gaussian_kernel(sigma, radius);
  std::vector<double> out(256, 0.0);
  for (int i = 0; i < 256; ++i) {
    double s = 0.0;
    for (int t = -radius; t <= radius; ++t) {
      const int j = i + t;
      if (j < 0 || j > 255) continue;
      s += k[static_cast<std::size_t>(t + radius)] * hist[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::vector<int> local_minima(std::span<const double> h) {
  return plateau_extrema(h, [](double v, double n) { return v < n; });
}

std::vector<int> local_maxima(std::span<const double> h) {
  return plateau_extrema(h, [](double v, double n) { return v > n; });
}

std::vector<HistogramPartition> dynamic_partitions(std::span<const double> smoothed,
                                                   std::span<const int> cuts) {
  const int n = static_cast<int>(smoothed.size());
  int lo = 0;
  while (lo < n && smoothed[static_cast<std::size_t>(lo)] <= 0.0) ++lo;
  int hi = n - 1;
  while (hi >= 0 && smoothed[static_cast<std::size_t>(hi)] <= 0.0) --hi;
  if (lo > hi) return {};

  std::vector<int> bounds{lo};
  for (int c : cuts) {
    if (c > lo && c < hi) bounds.push_back(c);
  }
  bounds.push_back(hi);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  if (bounds.size() < 2) return {};

  double total_span = 0.0;
  for (std::size_t i = 1; i < bounds.size(); ++i) total_span += bounds[i] - bounds[i - 1];

  std::vector<HistogramPartition> parts;
  double start = 0.0;
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    HistogramPartition p;
    p.first = i == 1 ? bounds[0] : bounds[i - 1] + 1;
    p.last = bounds[i];
    p.span = bounds[i] - bounds[i - 1];
    p.out_start = start;
    p.out_range = p.span / total_span * 255.0;
    start += p.out_range;
    parts.push_back(p);
  }
  return parts;
}

std::optional<std::array<double, 256>> partitioned_equalization_lut(
    const Histogram256& hist, const std::vector<HistogramPartition>& parts) {
  if (parts.empty()) return std::nullopt;
  std::array<double, 256> lut{};
  // Bins outside the partitioned support keep the nearest partition edge.
  for (int k = 0; k < parts.front().first; ++k) lut[static_cast<std::size_t>(k)] = parts.front().out_start;
  for (const auto& p : parts) {
    std::uint64_t total = 0;
    for (int k = p.first; k <= p.last; ++k) total += hist.counts[static_cast<std::size_t>(k)];
    std::uint64_t run = 0;
    for (int k = p.first; k <= p.last; ++k) {
      run += hist.counts[static_cast<std::size_t>(k)];
      const double frac = total == 0 ? 0.0 : static_cast<double>(run) / total;
      lut[static_cast<std::size_t>(k)] = p.out_start + p.out_range * frac;
    }
  }
  const auto& back = parts.back();
  for (int k = back.last + 1; k < 256; ++k) lut[static_cast<std::size_t>(k)] = back.out_start + back.out_range;
  return lut;
}

RasterImage dhe(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane luma = to_gray(rgb);
  const Histogram256 hist = histogram(luma);
  const auto counts = as_counts(hist);
  const auto smoothed = moving_average(counts, cfg.dhe.smooth_width);
  const auto minima = local_minima(smoothed);
  if (minima.empty()) {
    spdlog::debug("dhe: histogram has no local minima, falling back to HE");
    return apply_lut_via_luma(rgb, equalization_lut(hist));
  }
  auto lut = partitioned_equalization_lut(hist, dynamic_partitions(smoothed, minima));
  if (!lut) {
    spdlog::debug("dhe: no usable partition, falling back to HE");
    return apply_lut_via_luma(rgb, equalization_lut(hist));
  }
  for (auto& v : *lut) v = std::nearbyint(v);
  return apply_lut_via_luma(rgb, *lut);
}

BpdheLuma bpdhe_luma(const FloatPlane& luma, const BpdheConfig& cfg) {
  const Histogram256 hist = histogram(luma);
  const auto counts = as_counts(hist);
  const auto smoothed = smooth_histogram_gaussian(counts, cfg.smooth_sigma, cfg.smooth_radius);
  const auto maxima = local_maxima(smoothed);
  auto lut = partitioned_equalization_lut(hist, dynamic_partitions(smoothed, maxima));
  if (!lut) lut = equalization_lut(hist);

  BpdheLuma r{map_luma(luma, *lut), FloatPlane(luma.width(), luma.height()), mean(luma), 0.0};
  r.equalized_mean = mean(r.equalized);
  if (!(r.equalized_mean > 0.0)) {
    throw DegenerateInputError("bpdhe: equalized output has zero mean brightness");
  }
  const double ratio = r.input_mean / r.equalized_mean;
  auto f = r.equalized.data();
  auto g = r.output.data();
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = ratio * f[i];
  return r;
}

RasterImage bpdhe(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane luma = to_gray(rgb);
  const BpdheLuma r = bpdhe_luma(luma, cfg.bpdhe);
  return apply_luma_ratio(rgb, luma, r.output);
}

std::array<double, 256> cao_gamma(const Histogram256& hist, double exponent) {
  const auto pdf = hist.pdf();
  const auto [mn, mx] = std::minmax_element(pdf.begin(), pdf.end());
  std::array<double, 256> w{};
  if (*mx - *mn <= 0.0) {
    w.fill(1.0 / 256.0);
  } else {
    for (std::size_t l = 0; l < 256; ++l) w[l] = std::pow((pdf[l] - *mn) / (*mx - *mn), exponent);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= sum;
  }
  std::array<double, 256> gamma{};
  double run = 0.0;
  for (std::size_t l = 0; l < 256; ++l) {
    run += w[l];
    gamma[l] = std::min(run, 1.0);
  }
  return gamma;
}

std::array<double, 256> adaptive_gamma_lut(std::span<const double, 256> gamma) {
  constexpr double kMax = 255.0;
  std::array<double, 256> lut{};
  for (std::size_t l = 1; l < 256; ++l) {
    lut[l] = std::nearbyint(kMax * std::pow(static_cast<double>(l) / kMax, gamma[l]));
  }
  return lut;
}

RasterImage cao(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane luma = to_gray(rgb);
  const bool bright = mean(luma) > cfg.cao.bright_threshold;
  FloatPlane work = luma;
  if (bright) {
    for (auto& v : work.data()) v = 255.0 - v;
  }
  const auto lut = adaptive_gamma_lut(cao_gamma(histogram(work), cfg.cao.exponent));
  FloatPlane mapped = map_luma(work, lut);
  if (bright) {
    for (auto& v : mapped.data()) v = 255.0 - v;
  }
  return apply_luma_ratio(rgb, luma, mapped);
}

}  // namespace pricce
