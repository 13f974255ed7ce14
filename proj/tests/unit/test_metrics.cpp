#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "pricce/error.hpp"
#include "pricce/metrics.hpp"
#include "synthetic.hpp"

using namespace pricce;

namespace {

FloatPlane luma(std::uint32_t seed, int w = 48, int h = 40) { return to_gray(support::natural_image(w, h, seed)); }

FloatPlane shifted(const FloatPlane& p, double d) {
  FloatPlane q = p;
  for (auto& v : q.data()) v = std::clamp(v + d, 0.0, 255.0);
  return q;
}

FloatPlane blurred(const FloatPlane& p) { return gaussian_filter(p, 1.2, 4); }

FloatPlane noisy(const FloatPlane& p, std::uint32_t seed, double amp) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, amp);
  FloatPlane q = p;
  for (auto& v : q.data()) v = std::clamp(v + n(rng), 0.0, 255.0);
  return q;
}

FloatPlane contrast(const FloatPlane& p, double gain) {
  const double m = mean(p);
  FloatPlane q = p;
  for (auto& v : q.data()) v = std::clamp(m + gain * (v - m), 0.0, 255.0);
  return q;
}

}  // namespace

TEST(MetricNames, RoundTripAndPolarity) {
  const char* names[] = {"psnr", "ssim", "ms-ssim", "gmsd", "vif"};
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    EXPECT_EQ(metric_name(kAllMetrics[i]), names[i]);
    EXPECT_EQ(parse_metric(names[i]), kAllMetrics[i]);
    EXPECT_EQ(higher_is_better(kAllMetrics[i]), kAllMetrics[i] != MetricId::GMSD);
  }
  EXPECT_THROW(parse_metric("dists"), ParameterError);
}

TEST(Psnr, Examples) {
  const FloatPlane a = luma(1);
  EXPECT_EQ(psnr(a, a).value, 100.0);
  EXPECT_NEAR(psnr(FloatPlane(16, 16, 0.0), FloatPlane(16, 16, 255.0)).value, 0.0, 1e-12);
  EXPECT_NEAR(psnr(FloatPlane(16, 16, 10.0), FloatPlane(16, 16, 11.0)).value, 10 * std::log10(255.0 * 255.0), 1e-9);
  EXPECT_NEAR(10 * std::log10(255.0 * 255.0), 48.13, 0.005);
  EXPECT_THROW(psnr(FloatPlane(16, 16), FloatPlane(16, 17)), DimensionError);
}

TEST(Ssim, IdentitySymmetryAndSize) {
  const FloatPlane a = luma(2), b = noisy(a, 3, 12);
  EXPECT_NEAR(ssim(a, a).value, 1.0, 1e-9);
  EXPECT_NEAR(ssim(a, b).value, ssim(b, a).value, 1e-12);
  EXPECT_THROW(ssim(FloatPlane(10, 20), FloatPlane(10, 20)), DimensionError);
  EXPECT_THROW(ssim(a, FloatPlane(48, 41)), DimensionError);
}

TEST(Ssim, InvertedNoiseIsAnticorrelated) {
  const FloatPlane x = support::random_plane(40, 40, 77);
  FloatPlane inv = x;
  for (auto& v : inv.data()) v = 255.0 - v;
  const double s = ssim(x, inv).value;
  EXPECT_LT(s, 0.1);
  EXPECT_NEAR(s, support::oracle_ssim_terms(x, inv).ssim, 1e-3);
}

TEST(Ssim, MatchesOracle) {
  const FloatPlane a = luma(4, 30, 26);
  for (const FloatPlane& b : {blurred(a), noisy(a, 5, 20), contrast(a, 0.5), shifted(a, 30)}) {
    const auto t = ssim_terms(a, b);
    const auto o = support::oracle_ssim_terms(a, b);
    EXPECT_NEAR(t.ssim, o.ssim, 1e-9);
    EXPECT_NEAR(t.cs, o.cs, 1e-9);
    EXPECT_GE(t.ssim, -1.0);
    EXPECT_LE(t.ssim, 1.0);
  }
}

TEST(MsSsim, ScaleTruncation) {
  EXPECT_EQ(ms_ssim_scale_count(32, 32), 2);
  EXPECT_EQ(ms_ssim_scale_count(16, 200), 1);
  EXPECT_EQ(ms_ssim_scale_count(176, 176), 5);
  EXPECT_EQ(ms_ssim_scale_count(10, 100), 0);
  for (int s = 1; s <= 5; ++s) {
    const auto w = ms_ssim_exponents(s);
    double sum = 0.0;
    for (double v : w) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
  const auto w2 = ms_ssim_exponents(2);
  EXPECT_NEAR(w2[0], 0.0448 / (0.0448 + 0.2856), 1e-15);
  EXPECT_EQ(w2[2], 0.0);
}

TEST(MsSsim, IdentityAndSymmetry) {
  const FloatPlane a = luma(6, 64, 64), b = blurred(a);
  EXPECT_NEAR(ms_ssim(a, a).value, 1.0, 1e-9);
  EXPECT_NEAR(ms_ssim(a, b).value, ms_ssim(b, a).value, 1e-12);
}

TEST(MsSsim, MatchesOracle) {
  const FloatPlane a = luma(7, 90, 70);
  for (const FloatPlane& b : {blurred(a), noisy(a, 8, 15), contrast(a, 0.6)}) {
    EXPECT_NEAR(ms_ssim(a, b).value, support::oracle_ms_ssim(a, b), 1e-9);
  }
}

TEST(MsSsim, DecreasesWithMeanShift) {
  const FloatPlane a = contrast(luma(9, 96, 96), 0.7);
  const double s5 = ms_ssim(a, shifted(a, 5)).value;
  const double s10 = ms_ssim(a, shifted(a, 10)).value;
  const double s20 = ms_ssim(a, shifted(a, 20)).value;
  EXPECT_LT(s10, s5);
  EXPECT_LT(s20, s10);
  EXPECT_LT(s5, 1.0);
  EXPECT_NEAR(s5, 0.99949817736651914, 1e-9);
  EXPECT_NEAR(s10, 0.99811241370772741, 1e-9);
  EXPECT_NEAR(s20, 0.99329449171270923, 1e-9);
}

TEST(Gmsd, IdentitySymmetryAndAffine) {
  const FloatPlane a = luma(10), b = noisy(a, 11, 10);
  EXPECT_NEAR(gmsd(a, a).value, 0.0, 1e-12);
  EXPECT_NEAR(gmsd(a, b).value, gmsd(b, a).value, 1e-12);
  EXPECT_FALSE(gmsd(a, b).higher_is_better);

  FloatPlane ramp(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) ramp(x, y) = 40.0 + 3.0 * x + 2.0 * y;
  }
  FloatPlane affine = ramp;
  for (auto& v : affine.data()) v = 1.5 * v + 10.0;
  std::vector<double> vals(ramp.data().begin(), ramp.data().end());
  std::shuffle(vals.begin(), vals.end(), std::mt19937(3));
  const FloatPlane shuffled(32, 32, vals);
  EXPECT_LT(gmsd(ramp, affine).value, gmsd(ramp, shuffled).value);
  EXPECT_THROW(gmsd(FloatPlane(3, 8), FloatPlane(3, 8)), DimensionError);
}

TEST(Vif, IdentityGainConstantAndDirection) {
  const FloatPlane a = luma(12, 64, 64);
  EXPECT_NEAR(vif(a, a).value, 1.0, 1e-6);

  const FloatPlane low = contrast(a, 0.4);
  const FloatPlane gained = contrast(low, 1.2);
  EXPECT_GT(vif(low, gained).value, 1.0);

  EXPECT_LT(vif(a, FloatPlane(64, 64, 128.0)).value, 0.05);
  EXPECT_THROW(vif(FloatPlane(64, 64, 3.0), a), DegenerateInputError);

  const FloatPlane b = blurred(a);
  EXPECT_GT(std::abs(vif(a, b).value - vif(b, a).value), 1e-6);
  EXPECT_GE(vif(a, b).value, 0.0);
}

TEST(Compare, ColorDispatchAndErrors) {
  const RasterImage x = support::natural_image(40, 32, 13);
  for (auto id : kAllMetrics) {
    const MetricScore s = compare(x, x, id);
    EXPECT_EQ(s.metric, id);
    EXPECT_NEAR(s.value, ideal_value(id), id == MetricId::VIF ? 1e-6 : 1e-9);
  }
  EXPECT_EQ(compare(x, x, MetricId::MSSSIM).value, 1.0);
  EXPECT_FALSE(compare(x, x, MetricId::GMSD).higher_is_better);
  EXPECT_THROW(compare(x, RasterImage(40, 34, 3), MetricId::SSIM), DimensionError);
  const RasterImage y = support::natural_image(40, 32, 14);
  EXPECT_EQ(compare(x, y, MetricId::SSIM).value, ssim(to_gray(x), to_gray(y)).value);
}

TEST(Compare, SymmetricMetrics) {
  const FloatPlane a = luma(15), b = contrast(luma(15), 0.5);
  for (auto id : {MetricId::PSNR, MetricId::SSIM, MetricId::MSSSIM, MetricId::GMSD}) {
    EXPECT_NEAR(compare(a, b, id).value, compare(b, a, id).value, 1e-9) << metric_name(id);
  }
}

TEST(Compare, ConcurrentCallsAgree) {
  const FloatPlane a = luma(16, 64, 64), b = noisy(a, 17, 8);
  std::array<double, 4> out{};
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < out.size(); ++i) pool.emplace_back([&, i] { out[i] = vif(a, b).value; });
  }
  for (double v : out) EXPECT_EQ(v, vif(a, b).value);
}
