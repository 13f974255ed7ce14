#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pricce/image.hpp"

namespace pricce {

/// Class label space of the selector network; ordinals are class indices.
enum class EnhancerId : int { HE = 0, SimplestCB = 1, Ying = 2, Cao = 3, DHE = 4, BPDHE = 5, MSRCR = 6 };

inline constexpr int kEnhancerCount = 7;
inline constexpr std::array<EnhancerId, kEnhancerCount> kAllEnhancers = {
    EnhancerId::HE,  EnhancerId::SimplestCB, EnhancerId::Ying,  EnhancerId::Cao,
    EnhancerId::DHE, EnhancerId::BPDHE,      EnhancerId::MSRCR};

constexpr int ordinal(EnhancerId id) noexcept { return static_cast<int>(id); }
EnhancerId enhancer_from_ordinal(int ordinal);
std::string_view enhancer_name(EnhancerId id) noexcept;
EnhancerId parse_enhancer(std::string_view name);

struct SimplestCbConfig {
  double low_fraction = 0.01;
  double high_fraction = 0.01;
  friend bool operator==(const SimplestCbConfig&, const SimplestCbConfig&) = default;
};

struct MsrcrConfig {
  std::vector<double> sigmas = {15.0, 80.0, 250.0};
  std::vector<double> weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  double alpha = 125.0;
  double beta = 46.0;
  double tail_fraction = 0.01;
  friend bool operator==(const MsrcrConfig&, const MsrcrConfig&) = default;
};

struct DheConfig {
  int smooth_width = 5;
  friend bool operator==(const DheConfig&, const DheConfig&) = default;
};

struct BpdheConfig {
  double smooth_sigma = 2.0;
  int smooth_radius = 4;
  friend bool operator==(const BpdheConfig&, const BpdheConfig&) = default;
};

struct YingConfig {
  double a = -0.3293;
  double b = 1.1258;
  double mu = 0.5;
  double k_min = 1.0;
  double k_max = 7.0;
  double k_step = 0.05;
  /// Pixels with smoothed illumination below this are treated as under-exposed.
  double dark_threshold = 0.5;
  double illumination_sigma = 2.0;
  int illumination_radius = 6;
  friend bool operator==(const YingConfig&, const YingConfig&) = default;
};

struct CaoConfig {
  double bright_threshold = 128.0;
  double exponent = 0.75;
  friend bool operator==(const CaoConfig&, const CaoConfig&) = default;
};

struct EnhancerConfig {
  SimplestCbConfig simplest_cb;
  MsrcrConfig msrcr;
  DheConfig dhe;
  BpdheConfig bpdhe;
  YingConfig ying;
  CaoConfig cao;

  /// Throws ParameterError naming the first violated constraint.
  void validate() const;
  friend bool operator==(const EnhancerConfig&, const EnhancerConfig&) = default;
};

/// Overrides defaults from `key = value` lines (`#` starts a comment).
/// Keys are `<algorithm>.<field>`, e.g. `msrcr.sigmas = 15, 80, 250`.
EnhancerConfig parse_enhancer_config(std::string_view text, EnhancerConfig base = {});
std::string to_config_text(const EnhancerConfig& cfg);
std::string to_json_string(const EnhancerConfig& cfg);
EnhancerConfig enhancer_config_from_json_string(std::string_view json);

/// Output is always 3-channel with the input's dimensions.
RasterImage enhance(const RasterImage& img, EnhancerId id, const EnhancerConfig& cfg = {});

RasterImage he(const RasterImage& img);
RasterImage dhe(const RasterImage& img, const EnhancerConfig& cfg = {});
RasterImage bpdhe(const RasterImage& img, const EnhancerConfig& cfg = {});
RasterImage simplest_cb(const RasterImage& img, const EnhancerConfig& cfg = {});
RasterImage msrcr(const RasterImage& img, const EnhancerConfig& cfg = {});
RasterImage ying(const RasterImage& img, const EnhancerConfig& cfg = {});
RasterImage cao(const RasterImage& img, const EnhancerConfig& cfg = {});

// Building blocks, public so their algebra can be checked directly.

/// s_k = round(255 * CDF(k)).
std::array<double, 256> equalization_lut(const Histogram256& hist);

/// Scales each RGB pixel by new_luma / luma; black pixels take new_luma as gray.
RasterImage apply_luma_ratio(const RasterImage& rgb, const FloatPlane& luma,
                             const FloatPlane& new_luma);

struct HistogramPartition {
  int first;  ///< inclusive input bin
  int last;   ///< inclusive input bin
  double span;
  double out_start;
  double out_range;
};

std::vector<double> moving_average(std::span<const double, 256> hist, int width);
std::vector<double> smooth_histogram_gaussian(std::span<const double, 256> hist, double sigma, int radius);
/// Plateau-aware local extrema strictly inside [lo, hi]; a plateau reports its midpoint.
std::vector<int> local_minima(std::span<const double> h);
std::vector<int> local_maxima(std::span<const double> h);
/// Splits the support of `smoothed` at `cuts`; output ranges are proportional to spans.
std::vector<HistogramPartition> dynamic_partitions(std::span<const double> smoothed,
                                                   std::span<const int> cuts);
/// Equalizes each partition into its output range; empty optional when there
/// is no usable partition.
std::optional<std::array<double, 256>> partitioned_equalization_lut(
    const Histogram256& hist, const std::vector<HistogramPartition>& parts);

struct BpdheLuma {
  FloatPlane equalized;  ///< f, straight after equalization
  FloatPlane output;     ///< g before clipping
  double input_mean;
  double equalized_mean;
};
BpdheLuma bpdhe_luma(const FloatPlane& luma, const BpdheConfig& cfg);

struct RetinexChannels {
  std::array<FloatPlane, 3> reflectance;  ///< before color restoration
  std::array<FloatPlane, 3> restored;     ///< after color restoration, before stretch
};
RetinexChannels msrcr_channels(const RasterImage& rgb, const MsrcrConfig& cfg);

/// g(P, k) = exp(b (1 - k^a)) * P^(k^a), P in [0,1].
double brightness_transform(double p, double k, const YingConfig& cfg) noexcept;
/// Smoothed per-pixel channel max, in [0,1].
FloatPlane ying_illumination(const RasterImage& rgb, const YingConfig& cfg);
/// Entropy-maximizing exposure ratio; empty when no pixel is under-exposed.
std::optional<double> ying_exposure_ratio(const RasterImage& rgb, const FloatPlane& illumination,
                                          const YingConfig& cfg);
/// R = W * P + (1 - W) * g(P, k) per channel.
RasterImage ying_fuse(const RasterImage& rgb, const FloatPlane& weight, double k,
                      const YingConfig& cfg);

/// Normalized weighted pdf ((pdf - min) / (max - min))^exponent, cumulated.
std::array<double, 256> cao_gamma(const Histogram256& hist, double exponent);
/// T(l) = round(255 * (l / 255)^gamma(l)), with T(0) = 0.
std::array<double, 256> adaptive_gamma_lut(std::span<const double, 256> gamma);

}  // namespace pricce
