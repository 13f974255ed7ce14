#pragma once

#include <array>
#include <string_view>

#include "pricce/image.hpp"

namespace pricce {

enum class MetricId { PSNR, SSIM, MSSSIM, GMSD, VIF };

inline constexpr std::array<MetricId, 5> kAllMetrics = {MetricId::PSNR, MetricId::SSIM,
                                                        MetricId::MSSSIM, MetricId::GMSD,
                                                        MetricId::VIF};

/// Score reported when the inputs are identical.
inline constexpr double kPsnrCap = 100.0;

struct MetricScore {
  MetricId metric;
  double value;
  bool higher_is_better;
};

std::string_view metric_name(MetricId id) noexcept;
MetricId parse_metric(std::string_view name);
bool higher_is_better(MetricId id) noexcept;
/// Value attained by compare(x, x).
double ideal_value(MetricId id) noexcept;

MetricScore psnr(const FloatPlane& ref, const FloatPlane& test);

/// Mean SSIM map, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
MetricScore ssim(const FloatPlane& ref, const FloatPlane& test);

struct SsimTerms {
  double ssim;  ///< mean of l * cs
  double cs;    ///< mean of the contrast-structure term
};
SsimTerms ssim_terms(const FloatPlane& ref, const FloatPlane& test);

/// Number of dyadic scales MS-SSIM uses for a w x h input (1..5).
int ms_ssim_scale_count(int width, int height) noexcept;
/// Standard exponents, renormalized over the first `scales`.
std::array<double, 5> ms_ssim_exponents(int scales) noexcept;
MetricScore ms_ssim(const FloatPlane& ref, const FloatPlane& test);

/// Std of the gradient magnitude similarity map (Prewitt, c = 170) after 2x downsampling.
MetricScore gmsd(const FloatPlane& ref, const FloatPlane& test);

/// Pixel-domain VIF over 4 Gaussian scales, noise variance 2. Directional:
/// information in `test` relative to the information in `ref`.
MetricScore vif(const FloatPlane& ref, const FloatPlane& test);

/// Converts both rasters to luma and dispatches.
MetricScore compare(const RasterImage& ref, const RasterImage& test, MetricId id);
MetricScore compare(const FloatPlane& ref, const FloatPlane& test, MetricId id);

}  // namespace pricce
