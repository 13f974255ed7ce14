#include "pricce/distort.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pricce/error.hpp"

namespace pricce {

namespace {

constexpr std::array<double, 5> kAlphas = {0.5, 0.75, 1.0, 1.25, 1.5};
constexpr std::array<double, 8> kGammas = {1.0 / 5, 1.0 / 3, 1.0 / 2, 1.0 / 1.5, 1.5, 2.0, 3.0, 5.0};
constexpr std::array<double, 12> kDeltas = {-120, -100, -80, -60, -40, -20, 20, 40, 60, 80, 100, 120};

// Cubic levels: x - t*(2x^3 - 3x^2 + x). Fixes f(0)=0 and f(1)=1 and
// flattens mid-tones as t grows; monotone for |t| <= 1.
constexpr std::array<double, 4> kCubicStrength = {-0.25, -0.5, -0.75, -1.0};
// Logistic levels: slope b4 around x = 0.5, rescaled so f(0)=0 and f(1)=1.
constexpr std::array<double, 4> kLogisticSlope = {0.25, 0.18, 0.12, 0.08};

std::array<double, 4> cubic_preset(double t) { return {-2.0 * t, 3.0 * t, 1.0 - t, 0.0}; }

std::array<double, 4> logistic_preset(double b4) {
  const double s0 = 1.0 / (1.0 + std::exp(0.5 / b4));
  const double span = 1.0 / (1.0 - 2.0 * s0);
  const double b2 = -s0 * span;
  return {b2 + span, b2, 0.5, b4};
}

template <std::size_t N>
std::optional<int> level_of(const std::array<double, N>& levels, double v) {
  for (std::size_t i = 0; i < N; ++i) {
    if (std::abs(levels[i] - v) <= 1e-12 * std::max(1.0, std::abs(v))) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::optional<int> preset_level(const std::array<double, 4>& v, bool cubic) {
  for (int i = 0; i < 4; ++i) {
    const auto p = cubic ? cubic_preset(kCubicStrength[static_cast<std::size_t>(i)])
                         : logistic_preset(kLogisticSlope[static_cast<std::size_t>(i)]);
    bool same = true;
    for (std::size_t j = 0; j < 4; ++j) same = same && std::abs(p[j] - v[j]) <= 1e-12;
    if (same) return i + 1;
  }
  return std::nullopt;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

template <class F>
RasterImage map_channels(const RasterImage& rgb, F&& f) {
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = to_u8(f(static_cast<double>(v)));
  RasterImage out = rgb;
  for (auto& s : out.data()) s = lut[s];
  return out;
}

}  // namespace

DistortionSpec DistortionSpec::contrast_change(double alpha) {
  if (!level_of(kAlphas, alpha)) {
    throw ParameterError("contrast change alpha " + fmt(alpha) + " is not a catalog level");
  }
  return DistortionSpec(ContrastChangeParams{alpha});
}

DistortionSpec DistortionSpec::gamma_transfer(double gamma) {
  if (!level_of(kGammas, gamma)) {
    throw ParameterError("gamma " + fmt(gamma) + " is not a catalog level");
  }
  return DistortionSpec(GammaParams{gamma});
}

DistortionSpec DistortionSpec::cubic(const std::array<double, 4>& a) {
  if (!preset_level(a, true)) throw ParameterError("cubic coefficients are not a catalog preset");
  return DistortionSpec(CubicParams{a});
}

DistortionSpec DistortionSpec::logistic(const std::array<double, 4>& b) {
  if (!preset_level(b, false)) throw ParameterError("logistic coefficients are not a catalog preset");
  return DistortionSpec(LogisticParams{b});
}

DistortionSpec DistortionSpec::mean_shift(double delta) {
  if (!level_of(kDeltas, delta)) {
    throw ParameterError("mean shift delta " + fmt(delta) + " is not a catalog level");
  }
  return DistortionSpec(MeanShiftParams{delta});
}

DistortionSpec DistortionSpec::unchecked(DistortionParams params) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
          if (!(p.gamma > 0.0)) throw ParameterError("gamma must be positive");
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          if (p.b[3] == 0.0) throw ParameterError("logistic b4 must be non-zero");
        }
      },
      params);
  return DistortionSpec(std::move(params));
}

DistortionSpec DistortionSpec::from_catalog(DistortionFamily family, int level) {
  const int n = family_level_count(family);
  if (level < 1 || level > n) {
    throw ParameterError("level " + std::to_string(level) + " out of range 1.." + std::to_string(n) +
                         " for " + std::string(family_name(family)));
  }
  const auto i = static_cast<std::size_t>(level - 1);
  switch (family) {
    case DistortionFamily::ContrastChange: return DistortionSpec(ContrastChangeParams{kAlphas[i]});
    case DistortionFamily::GammaTransfer: return DistortionSpec(GammaParams{kGammas[i]});
    case DistortionFamily::Logistic: return DistortionSpec(LogisticParams{logistic_preset(kLogisticSlope[i])});
    case DistortionFamily::Cubic: return DistortionSpec(CubicParams{cubic_preset(kCubicStrength[i])});
    case DistortionFamily::MeanShift: return DistortionSpec(MeanShiftParams{kDeltas[i]});
  }
  throw ParameterError("unknown distortion family");
}

DistortionFamily DistortionSpec::family() const noexcept {
  switch (params_.index()) {
    case 0: return DistortionFamily::ContrastChange;
    case 1: return DistortionFamily::GammaTransfer;
    case 2: return DistortionFamily::Cubic;
    case 3: return DistortionFamily::Logistic;
    default: return DistortionFamily::MeanShift;
  }
}

std::vector<double> DistortionSpec::param_values() const {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ContrastChangeParams>) return {p.alpha};
        else if constexpr (std::is_same_v<T, GammaParams>) return {p.gamma};
        else if constexpr (std::is_same_v<T, CubicParams>) return {p.a.begin(), p.a.end()};
        else if constexpr (std::is_same_v<T, LogisticParams>) return {p.b.begin(), p.b.end()};
        else return {p.delta};
      },
      params_);
}

std::optional<int> DistortionSpec::catalog_level() const {
  return std::visit(
      [](const auto& p) -> std::optional<int> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ContrastChangeParams>) return level_of(kAlphas, p.alpha);
        else if constexpr (std::is_same_v<T, GammaParams>) return level_of(kGammas, p.gamma);
        else if constexpr (std::is_same_v<T, CubicParams>) return preset_level(p.a, true);
        else if constexpr (std::is_same_v<T, LogisticParams>) return preset_level(p.b, false);
        else return level_of(kDeltas, p.delta);
      },
      params_);
}

std::string DistortionSpec::describe() const {
  std::string s(family_name(family()));
  s += "(";
  const auto v = param_values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  s += ")";
  return s;
}

std::string_view family_name(DistortionFamily f) noexcept {
  switch (f) {
    case DistortionFamily::ContrastChange: return "contrast-change";
    case DistortionFamily::GammaTransfer: return "gamma";
    case DistortionFamily::Logistic: return "logistic";
    case DistortionFamily::Cubic: return "cubic";
    case DistortionFamily::MeanShift: return "mean-shift";
  }
  return "unknown";
}

DistortionFamily parse_family(std::string_view name) {
  for (auto f : {DistortionFamily::ContrastChange, DistortionFamily::GammaTransfer,
                 DistortionFamily::Logistic, DistortionFamily::Cubic, DistortionFamily::MeanShift}) {
    if (family_name(f) == name) return f;
  }
  throw ParameterError("unknown distortion family '" + std::string(name) +
                       "' (expected contrast-change, gamma, logistic, cubic or mean-shift)");
}

DistortionSpec spec_from_values(DistortionFamily family, const std::vector<double>& v) {
  auto need = [&](std::size_t n) {
    if (v.size() != n) {
      throw ParameterError(std::string(family_name(family)) + " expects " + std::to_string(n) +
                           " parameters, got " + std::to_string(v.size()));
    }
  };
  switch (family) {
    case DistortionFamily::ContrastChange: need(1); return DistortionSpec::unchecked(ContrastChangeParams{v[0]});
    case DistortionFamily::GammaTransfer: need(1); return DistortionSpec::unchecked(GammaParams{v[0]});
    case DistortionFamily::Cubic: need(4); return DistortionSpec::unchecked(CubicParams{{v[0], v[1], v[2], v[3]}});
    case DistortionFamily::Logistic: need(4); return DistortionSpec::unchecked(LogisticParams{{v[0], v[1], v[2], v[3]}});
    case DistortionFamily::MeanShift: need(1); return DistortionSpec::unchecked(MeanShiftParams{v[0]});
  }
  throw ParameterError("unknown distortion family");
}

int family_level_count(DistortionFamily f) noexcept {
  switch (f) {
    case DistortionFamily::ContrastChange: return static_cast<int>(kAlphas.size());
    case DistortionFamily::GammaTransfer: return static_cast<int>(kGammas.size());
    case DistortionFamily::Logistic: return static_cast<int>(kLogisticSlope.size());
    case DistortionFamily::Cubic: return static_cast<int>(kCubicStrength.size());
    case DistortionFamily::MeanShift: return static_cast<int>(kDeltas.size());
  }
  return 0;
}

const std::vector<DistortionSpec>& catalog() {
  static const std::vector<DistortionSpec> presets = [] {
    std::vector<DistortionSpec> v;
    for (auto f : {DistortionFamily::ContrastChange, DistortionFamily::GammaTransfer,
                   DistortionFamily::Logistic, DistortionFamily::Cubic, DistortionFamily::MeanShift}) {
      for (int l = 1; l <= family_level_count(f); ++l) v.push_back(DistortionSpec::from_catalog(f, l));
    }
    return v;
  }();
  return presets;
}

RasterImage apply_distortion(const RasterImage& img, const DistortionSpec& spec) {
  const RasterImage rgb = ensure_rgb(img);
  return std::visit(
      [&](const auto& p) -> RasterImage {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ContrastChangeParams>) {
          const FloatPlane gray = to_gray(rgb);
          RasterImage out = rgb;
          auto src = rgb.data();
          auto dst = out.data();
          const auto g = gray.data();
          for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
              dst[3 * i + c] = to_u8((1.0 - p.alpha) * src[3 * i + c] + p.alpha * g[i]);
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, GammaParams>) {
          return map_channels(rgb, [&](double v) { return 255.0 * std::pow(v / 255.0, 1.0 / p.gamma); });
        } else if constexpr (std::is_same_v<T, CubicParams>) {
          return map_channels(rgb, [&](double v) {
            const double x = v / 255.0;
            return 255.0 * (((p.a[0] * x + p.a[1]) * x + p.a[2]) * x + p.a[3]);
          });
        } else if constexpr (std::is_same_v<T, LogisticParams>) {
          return map_channels(rgb, [&](double v) {
            const double x = v / 255.0;
            return 255.0 * ((p.b[0] - p.b[1]) / (1.0 + std::exp(-(x - p.b[2]) / p.b[3])) + p.b[1]);
          });
        } else {
          return map_channels(rgb, [&](double v) { return v + p.delta; });
        }
      },
      spec.params());
}

}  // namespace pricce
