#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pricce/image.hpp"

namespace pricce {

inline constexpr std::string_view kCatalogVersion = "pricce-catalog-1";

enum class DistortionFamily { ContrastChange, GammaTransfer, Logistic, Cubic, MeanShift };

struct ContrastChangeParams {
  double alpha;
};
struct GammaParams {
  double gamma;
};
/// a1*x^3 + a2*x^2 + a3*x + a4 on x in [0,1].
struct CubicParams {
  std::array<double, 4> a;
};
/// (b1 - b2) / (1 + exp(-(x - b3) / b4)) + b2 on x in [0,1].
struct LogisticParams {
  std::array<double, 4> b;
};
struct MeanShiftParams {
  double delta;
};

using DistortionParams =
    std::variant<ContrastChangeParams, GammaParams, CubicParams, LogisticParams, MeanShiftParams>;

/// A contrast distortion. The checked factories only accept catalog levels;
/// `unchecked` admits arbitrary parameters.
class DistortionSpec {
 public:
  static DistortionSpec contrast_change(double alpha);
  static DistortionSpec gamma_transfer(double gamma);
  static DistortionSpec cubic(const std::array<double, 4>& a);
  static DistortionSpec logistic(const std::array<double, 4>& b);
  static DistortionSpec mean_shift(double delta);
  static DistortionSpec unchecked(DistortionParams params);
  /// `level` is 1-based within the family.
  static DistortionSpec from_catalog(DistortionFamily family, int level);

  DistortionFamily family() const noexcept;
  const DistortionParams& params() const noexcept { return params_; }
  /// Parameters flattened in declaration order.
  std::vector<double> param_values() const;
  /// 1-based level within the family if the parameters are a catalog preset.
  std::optional<int> catalog_level() const;
  std::string describe() const;

  friend bool operator==(const DistortionSpec& a, const DistortionSpec& b) {
    return a.param_values() == b.param_values() && a.family() == b.family();
  }

 private:
  explicit DistortionSpec(DistortionParams p) : params_(std::move(p)) {}
  DistortionParams params_;
};

std::string_view family_name(DistortionFamily f) noexcept;
DistortionFamily parse_family(std::string_view name);
/// Rebuilds a spec from a family and flat parameter list (manifest decoding).
DistortionSpec spec_from_values(DistortionFamily family, const std::vector<double>& values);

/// 33 presets in table order: contrast change, gamma, logistic, cubic, mean shift.
const std::vector<DistortionSpec>& catalog();
int family_level_count(DistortionFamily f) noexcept;

/// Every family except contrast change acts per channel on normalized
/// intensities; results are clipped to [0,255]. Gray input is promoted to RGB.
RasterImage apply_distortion(const RasterImage& img, const DistortionSpec& spec);

}  // namespace pricce
