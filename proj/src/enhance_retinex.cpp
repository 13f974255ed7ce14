// Channel-domain enhancers: simplest color balance, MSRCR, and the
// exposure-fusion enhancer of Ying et al.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pricce/enhance.hpp"
#include "pricce/error.hpp"

namespace pricce {

namespace {

// Affine map of [lo, hi] onto [0, 255]; a flat channel is returned unchanged.
FloatPlane stretch(const FloatPlane& p, double lo, double hi) {
  if (!(hi - lo > 1e-12)) return p;
  FloatPlane out(p.width(), p.height());
  const double scale = 255.0 / (hi - lo);
  auto src = p.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp((src[i] - lo) * scale, 0.0, 255.0);
  return out;
}

}  // namespace

RasterImage simplest_cb(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const double s_low = cfg.simplest_cb.low_fraction;
  const double s_high = cfg.simplest_cb.high_fraction;
  RasterImage out = rgb;
  const auto n = static_cast<double>(rgb.pixel_count());
  for (int c = 0; c < 3; ++c) {
    std::array<std::uint64_t, 256> counts{};
    for (std::size_t i = 0; i < rgb.pixel_count(); ++i) ++counts[rgb.data()[3 * i + c]];
    int v_low = 0;
    std::uint64_t run = counts[0];
    while (v_low < 255 && static_cast<double>(run) <= s_low * n) run += counts[static_cast<std::size_t>(++v_low)];
    int v_high = 255;
    run = counts[255];
    while (v_high > 0 && static_cast<double>(run) <= s_high * n) run += counts[static_cast<std::size_t>(--v_high)];
    if (v_high <= v_low) continue;  // flat channel
    std::array<std::uint8_t, 256> lut{};
    const double scale = 255.0 / (v_high - v_low);
    for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = to_u8((v - v_low) * scale);
    for (std::size_t i = 0; i < rgb.pixel_count(); ++i) {
      auto& s = out.data()[3 * i + c];
      s = lut[s];
    }
  }
  return out;
}

RetinexChannels msrcr_channels(const RasterImage& img, const MsrcrConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  RetinexChannels r;
  std::array<FloatPlane, 3> log_i;
  FloatPlane sum(rgb.width(), rgb.height());
  for (int c = 0; c < 3; ++c) {
    FloatPlane plane = channel_plane(rgb, c);
    for (auto& v : plane.data()) v += 1.0;
    for (std::size_t i = 0; i < plane.size(); ++i) sum.data()[i] += plane.data()[i];
    FloatPlane refl(rgb.width(), rgb.height());
    log_i[static_cast<std::size_t>(c)] = plane;
    for (auto& v : log_i[static_cast<std::size_t>(c)].data()) v = std::log(v);
    for (std::size_t k = 0; k < cfg.sigmas.size(); ++k) {
      if (cfg.weights[k] == 0.0) continue;
      const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * cfg.sigmas[k])));
      const FloatPlane surround = gaussian_filter(plane, cfg.sigmas[k], radius);
      auto li = log_i[static_cast<std::size_t>(c)].data();
      auto s = surround.data();
      auto d = refl.data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += cfg.weights[k] * (li[i] - std::log(s[i]));
    }
    r.reflectance[static_cast<std::size_t>(c)] = std::move(refl);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    FloatPlane restored(rgb.width(), rgb.height());
    auto li = log_i[c].data();
    auto rf = r.reflectance[c].data();
    auto sm = sum.data();
    auto d = restored.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double color = cfg.beta * (std::log(cfg.alpha) + li[i] - std::log(sm[i]));
      d[i] = color * rf[i];
    }
    r.restored[c] = std::move(restored);
  }
  return r;
}

RasterImage msrcr(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const RetinexChannels r = msrcr_channels(rgb, cfg.msrcr);
  std::array<FloatPlane, 3> out;
  for (std::size_t c = 0; c < 3; ++c) {
    const FloatPlane& p = r.restored[c];
    std::vector<double> sorted(p.data().begin(), p.data().end());
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    const auto lo_i = static_cast<std::size_t>(std::floor(cfg.msrcr.tail_fraction * last));
    const auto hi_i = static_cast<std::size_t>(std::ceil((1.0 - cfg.msrcr.tail_fraction) * last));
    const double lo = sorted[lo_i];
    const double hi = sorted[hi_i];
    out[c] = hi - lo > 1e-12 ? stretch(p, lo, hi) : channel_plane(rgb, static_cast<int>(c));
  }
  return planes_to_rgb(out[0], out[1], out[2]);
}

double brightness_transform(double p, double k, const YingConfig& cfg) noexcept {
  const double ka = std::pow(k, cfg.a);
  return std::exp(cfg.b * (1.0 - ka)) * std::pow(p, ka);
}

FloatPlane ying_illumination(const RasterImage& img, const YingConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  FloatPlane t(rgb.width(), rgb.height());
  auto src = rgb.data();
  auto dst = t.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::max({src[3 * i], src[3 * i + 1], src[3 * i + 2]}) / 255.0;
  }
  FloatPlane smooth = gaussian_filter(t, cfg.illumination_sigma, cfg.illumination_radius);
  for (auto& v : smooth.data()) v = std::clamp(v, 0.0, 1.0);
  return smooth;
}

std::optional<double> ying_exposure_ratio(const RasterImage& img, const FloatPlane& illumination,
                                          const YingConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  std::vector<double> dark;
  auto src = rgb.data();
  auto t = illumination.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cfg.dark_threshold) {
      const double prod = (src[3 * i] / 255.0) * (src[3 * i + 1] / 255.0) * (src[3 * i + 2] / 255.0);
      dark.push_back(std::cbrt(prod));
    }
  }
  if (dark.empty()) return std::nullopt;

  auto entropy_at = [&](double k) {
    std::array<std::uint64_t, 256> counts{};
    for (double y : dark) ++counts[to_u8(255.0 * std::min(1.0, brightness_transform(y, k, cfg)))];
    double e = 0.0;
    const auto n = static_cast<double>(dark.size());
    for (auto c : counts) {
      if (c == 0) continue;
      const double p = c / n;
      e -= p * std::log2(p);
    }
    return e;
  };

  double best_k = cfg.k_min;
  double best_e = entropy_at(best_k);
  const int steps = static_cast<int>(std::floor((cfg.k_max - cfg.k_min) / cfg.k_step + 1e-9));
  for (int s = 1; s <= steps; ++s) {
    const double k = cfg.k_min + s * cfg.k_step;
    const double e = entropy_at(k);
    if (e > best_e) {
      best_e = e;
      best_k = k;
    }
  }
  return best_k;
}

RasterImage ying_fuse(const RasterImage& img, const FloatPlane& weight, double k,
                      const YingConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  if (weight.width() != rgb.width() || weight.height() != rgb.height()) {
    throw DimensionError("fusion weight does not match the raster");
  }
  std::array<double, 256> btf{};
  for (int v = 0; v < 256; ++v) btf[static_cast<std::size_t>(v)] = brightness_transform(v / 255.0, k, cfg);
  RasterImage out = rgb;
  auto src = rgb.data();
  auto dst = out.data();
  auto w = weight.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto v = src[3 * i + c];
      const double fused = w[i] * (v / 255.0) + (1.0 - w[i]) * btf[v];
      dst[3 * i + c] = to_u8(255.0 * fused);
    }
  }
  return out;
}

RasterImage ying(const RasterImage& img, const EnhancerConfig& cfg) {
  const RasterImage rgb = ensure_rgb(img);
  const FloatPlane t = ying_illumination(rgb, cfg.ying);
  const auto k = ying_exposure_ratio(rgb, t, cfg.ying);
  if (!k) return rgb;
  FloatPlane w = t;
  for (auto& v : w.data()) v = std::pow(v, cfg.ying.mu);
  return ying_fuse(rgb, w, *k, cfg.ying);
}

}  // namespace pricce
