#include "pricce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pricce/error.hpp"

namespace pricce {

namespace {

constexpr double kL = 255.0;
constexpr double kC1 = (0.01 * kL) * (0.01 * kL);
constexpr double kC2 = (0.03 * kL) * (0.03 * kL);
constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr double kGmsdC = 170.0;
constexpr double kVifNoiseVar = 2.0;

void require_same(const FloatPlane& a, const FloatPlane& b, const char* who) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(who) + ": dimension mismatch " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

FloatPlane product(const FloatPlane& a, const FloatPlane& b) {
  FloatPlane out(a.width(), a.height());
  auto x = a.data(), y = b.data();
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] * y[i];
  return out;
}

// Local moments under `kernel`: mean of each input, variances, covariance.
struct LocalMoments {
  FloatPlane mu1, mu2, s11, s22, s12;
};

LocalMoments local_moments(const FloatPlane& a, const FloatPlane& b, std::span<const double> kernel) {
  LocalMoments m{separable_filter(a, kernel), separable_filter(b, kernel),
                 separable_filter(product(a, a), kernel), separable_filter(product(b, b), kernel),
                 separable_filter(product(a, b), kernel)};
  auto mu1 = m.mu1.data(), mu2 = m.mu2.data();
  auto s11 = m.s11.data(), s22 = m.s22.data(), s12 = m.s12.data();
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    s11[i] -= mu1[i] * mu1[i];
    s22[i] -= mu2[i] * mu2[i];
    s12[i] -= mu1[i] * mu2[i];
  }
  return m;
}

const std::vector<double>& ssim_window() {
  static const std::vector<double> k = gaussian_kernel(1.5, 5);
  return k;
}

FloatPlane subsample2(const FloatPlane& p) {
  const int w = (p.width() + 1) / 2;
  const int h = (p.height() + 1) / 2;
  FloatPlane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = p(2 * x, 2 * y);
  }
  return out;
}

}  // namespace

std::string_view metric_name(MetricId id) noexcept {
  switch (id) {
    case MetricId::PSNR: return "psnr";
    case MetricId::SSIM: return "ssim";
    case MetricId::MSSSIM: return "ms-ssim";
    case MetricId::GMSD: return "gmsd";
    case MetricId::VIF: return "vif";
  }
  return "unknown";
}

MetricId parse_metric(std::string_view name) {
  for (auto id : kAllMetrics) {
    if (metric_name(id) == name) return id;
  }
  throw ParameterError("unknown metric '" + std::string(name) +
                       "' (expected psnr, ssim, ms-ssim, gmsd or vif)");
}

bool higher_is_better(MetricId id) noexcept { return id != MetricId::GMSD; }

double ideal_value(MetricId id) noexcept {
  switch (id) {
    case MetricId::PSNR: return kPsnrCap;
    case MetricId::GMSD: return 0.0;
    default: return 1.0;
  }
}

MetricScore psnr(const FloatPlane& ref, const FloatPlane& test) {
  require_same(ref, test, "psnr");
  double sse = 0.0;
  auto a = ref.data(), b = test.data();
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = a.empty() ? 0.0 : sse / static_cast<double>(a.size());
  const double v = mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(kL * kL / mse));
  return {MetricId::PSNR, v, true};
}

SsimTerms ssim_terms(const FloatPlane& ref, const FloatPlane& test) {
  require_same(ref, test, "ssim");
  if (ref.width() < 11 || ref.height() < 11) {
    throw DimensionError("ssim: inputs must be at least 11x11, got " + std::to_string(ref.width()) +
                         "x" + std::to_string(ref.height()));
  }
  const auto m = local_moments(ref, test, ssim_window());
  auto mu1 = m.mu1.data(), mu2 = m.mu2.data();
  auto s11 = m.s11.data(), s22 = m.s22.data(), s12 = m.s12.data();
  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double l = (2.0 * mu1[i] * mu2[i] + kC1) / (mu1[i] * mu1[i] + mu2[i] * mu2[i] + kC1);
    const double cs = (2.0 * s12[i] + kC2) / (s11[i] + s22[i] + kC2);
    ssim_sum += l * cs;
    cs_sum += cs;
  }
  const auto n = static_cast<double>(mu1.size());
  return {ssim_sum / n, cs_sum / n};
}

MetricScore ssim(const FloatPlane& ref, const FloatPlane& test) {
  return {MetricId::SSIM, ssim_terms(ref, test).ssim, true};
}

int ms_ssim_scale_count(int width, int height) noexcept {
  int side = std::min(width, height);
  int scales = 0;
  while (scales < 5 && side >= 11) {
    ++scales;
    side /= 2;
  }
  return scales;
}

std::array<double, 5> ms_ssim_exponents(int scales) noexcept {
  std::array<double, 5> w{};
  double sum = 0.0;
  for (int i = 0; i < scales; ++i) sum += kMsSsimWeights[static_cast<std::size_t>(i)];
  for (int i = 0; i < scales; ++i) w[static_cast<std::size_t>(i)] = kMsSsimWeights[static_cast<std::size_t>(i)] / sum;
  return w;
}

MetricScore ms_ssim(const FloatPlane& ref, const FloatPlane& test) {
  require_same(ref, test, "ms-ssim");
  const int scales = ms_ssim_scale_count(ref.width(), ref.height());
  if (scales == 0) {
    throw DimensionError("ms-ssim: inputs must be at least 11x11");
  }
  const auto w = ms_ssim_exponents(scales);
  FloatPlane a = ref;
  FloatPlane b = test;
  double value = 1.0;
  for (int s = 0; s < scales; ++s) {
    const SsimTerms t = ssim_terms(a, b);
    // Negative terms would make fractional powers undefined.
    const double term = std::max(0.0, s + 1 == scales ? t.ssim : t.cs);
    value *= std::pow(term, w[static_cast<std::size_t>(s)]);
    if (s + 1 < scales) {
      a = downsample2(a);
      b = downsample2(b);
    }
  }
  return {MetricId::MSSSIM, value, true};
}

MetricScore gmsd(const FloatPlane& ref, const FloatPlane& test) {
  require_same(ref, test, "gmsd");
  if (ref.width() < 4 || ref.height() < 4) throw DimensionError("gmsd: inputs must be at least 4x4");
  const FloatPlane a = downsample2(ref);
  const FloatPlane b = downsample2(test);
  auto magnitude = [](const FloatPlane& p) {
    FloatPlane m(p.width(), p.height());
    for (int y = 0; y < p.height(); ++y) {
      for (int x = 0; x < p.width(); ++x) {
        double gx = 0.0, gy = 0.0;
        for (int t = -1; t <= 1; ++t) {
          gx += p.clamped(x - 1, y + t) - p.clamped(x + 1, y + t);
          gy += p.clamped(x + t, y - 1) - p.clamped(x + t, y + 1);
        }
        gx /= 3.0;
        gy /= 3.0;
        m(x, y) = std::sqrt(gx * gx + gy * gy);
      }
    }
    return m;
  };
  const FloatPlane ma = magnitude(a);
  const FloatPlane mb = magnitude(b);
  const auto n = ma.size();
  std::vector<double> gms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ma.data()[i], y = mb.data()[i];
    gms[i] = (2.0 * x * y + kGmsdC) / (x * x + y * y + kGmsdC);
  }
  const double mu = std::accumulate(gms.begin(), gms.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : gms) var += (v - mu) * (v - mu);
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  return {MetricId::GMSD, std::sqrt(var), false};
}

MetricScore vif(const FloatPlane& ref_in, const FloatPlane& test_in) {
  require_same(ref_in, test_in, "vif");
  FloatPlane ref = ref_in;
  FloatPlane test = test_in;
  double num = 0.0;
  double den = 0.0;
  for (int scale = 1; scale <= 4; ++scale) {
    const int n = (1 << (5 - scale)) + 1;
    const auto kernel = gaussian_kernel(n / 5.0, (n - 1) / 2);
    if (scale > 1) {
      ref = subsample2(separable_filter(ref, kernel));
      test = subsample2(separable_filter(test, kernel));
    }
    auto m = local_moments(ref, test, kernel);
    auto s11 = m.s11.data(), s22 = m.s22.data(), s12 = m.s12.data();
    for (std::size_t i = 0; i < s11.size(); ++i) {
      double sigma1_sq = std::max(0.0, s11[i]);
      double sigma2_sq = std::max(0.0, s22[i]);
      double g = s12[i] / (sigma1_sq + 1e-10);
      double sv_sq = sigma2_sq - g * s12[i];
      if (sigma1_sq < 1e-10) {
        g = 0.0;
        sv_sq = sigma2_sq;
        sigma1_sq = 0.0;
      }
      if (sigma2_sq < 1e-10) {
        g = 0.0;
        sv_sq = 0.0;
      }
      if (g < 0.0) {
        sv_sq = sigma2_sq;
        g = 0.0;
      }
      sv_sq = std::max(sv_sq, 1e-10);
      num += std::log10(1.0 + g * g * sigma1_sq / (sv_sq + kVifNoiseVar));
      den += std::log10(1.0 + sigma1_sq / kVifNoiseVar);
    }
  }
  if (!(den > 0.0)) {
    throw DegenerateInputError("vif: reference carries no information (constant image)");
  }
  return {MetricId::VIF, num / den, true};
}

MetricScore compare(const FloatPlane& ref, const FloatPlane& test, MetricId id) {
  switch (id) {
    case MetricId::PSNR: return psnr(ref, test);
    case MetricId::SSIM: return ssim(ref, test);
    case MetricId::MSSSIM: return ms_ssim(ref, test);
    case MetricId::GMSD: return gmsd(ref, test);
    case MetricId::VIF: return vif(ref, test);
  }
  throw ParameterError("unknown metric");
}

MetricScore compare(const RasterImage& ref, const RasterImage& test, MetricId id) {
  if (ref.width() != test.width() || ref.height() != test.height()) {
    throw DimensionError("compare: dimension mismatch " + std::to_string(ref.width()) + "x" +
                         std::to_string(ref.height()) + " vs " + std::to_string(test.width()) + "x" +
                         std::to_string(test.height()));
  }
  return compare(to_gray(ref), to_gray(test), id);
}

}  // namespace pricce
