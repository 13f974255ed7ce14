#pragma once

// Slow, direct transcriptions used to cross-check the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pricce/enhance.hpp"
#include "pricce/image.hpp"
#include "pricce/metrics.hpp"

namespace pricce::support {

struct OracleSsim {
  double ssim;
  double cs;
};

// Per-pixel 11x11 Gaussian window (sigma 1.5) with clamped coordinates;
// moments taken about the local mean.
inline OracleSsim oracle_ssim_terms(const FloatPlane& a, const FloatPlane& b) {
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double w[11][11];
  double z = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      z += w[i][j];
    }
  }
  const int W = a.width(), H = a.height();
  double ssim_sum = 0.0, cs_sum = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      auto px = [&](const FloatPlane& p, int i, int j) {
        const int yy = std::clamp(y + i - 5, 0, H - 1), xx = std::clamp(x + j - 5, 0, W - 1);
        return p(xx, yy);
      };
      double m1 = 0, m2 = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          m1 += w[i][j] / z * px(a, i, j);
          m2 += w[i][j] / z * px(b, i, j);
        }
      }
      double v1 = 0, v2 = 0, cov = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double d1 = px(a, i, j) - m1, d2 = px(b, i, j) - m2;
          v1 += w[i][j] / z * d1 * d1;
          v2 += w[i][j] / z * d2 * d2;
          cov += w[i][j] / z * d1 * d2;
        }
      }
      const double cs = (2 * cov + c2) / (v1 + v2 + c2);
      ssim_sum += (2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1) * cs;
      cs_sum += cs;
    }
  }
  const double n = static_cast<double>(W) * H;
  return {ssim_sum / n, cs_sum / n};
}

inline FloatPlane oracle_halve(const FloatPlane& p) {
  FloatPlane out(p.width() / 2, p.height() / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(x, y) = (p(2 * x, 2 * y) + p(2 * x + 1, 2 * y) + p(2 * x, 2 * y + 1) + p(2 * x + 1, 2 * y + 1)) / 4;
    }
  }
  return out;
}

inline double oracle_ms_ssim(const FloatPlane& a, const FloatPlane& b) {
  const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  std::vector<FloatPlane> pa{a}, pb{b};
  while (pa.size() < 5 && std::min(pa.back().width(), pa.back().height()) / 2 >= 11) {
    pa.push_back(oracle_halve(pa.back()));
    pb.push_back(oracle_halve(pb.back()));
  }
  const std::size_t m = pa.size();
  double wsum = 0;
  for (std::size_t s = 0; s < m; ++s) wsum += weights[s];
  double v = 1.0;
  for (std::size_t s = 0; s < m; ++s) {
    const auto t = oracle_ssim_terms(pa[s], pb[s]);
    v *= std::pow(std::max(0.0, s + 1 == m ? t.ssim : t.cs), weights[s] / wsum);
  }
  return v;
}

// Tau-b by listing every pair.
inline double oracle_kendall(const std::vector<double>& x, const std::vector<double>& y) {
  auto sign = [](double d) { return (d > 0) - (d < 0); };
  long long s = 0, pairs_x = 0, pairs_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i >= j) continue;
      const int sx = sign(x[i] - x[j]), sy = sign(y[i] - y[j]);
      s += sx * sy;
      pairs_x += sx != 0;
      pairs_y += sy != 0;
    }
  }
  return static_cast<double>(s) / std::sqrt(static_cast<double>(pairs_x) * static_cast<double>(pairs_y));
}

struct OracleLabel {
  EnhancerId label;
  std::array<double, kEnhancerCount> scores;
};

// Label by re-running every enhancer and VIF directly.
inline OracleLabel oracle_label(const RasterImage& ref, const RasterImage& dist, const EnhancerConfig& cfg) {
  OracleLabel out{EnhancerId::HE, {}};
  double best = -1e300;
  for (int k = 0; k < kEnhancerCount; ++k) {
    const EnhancerId id = enhancer_from_ordinal(k);
    const double v = vif(to_gray(ref), to_gray(enhance(dist, id, cfg))).value;
    out.scores[static_cast<std::size_t>(k)] = v;
    if (v > best) {
      best = v;
      out.label = id;
    }
  }
  return out;
}

}  // namespace pricce::support
