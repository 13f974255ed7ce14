#include "pricce/enhance.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pricce/error.hpp"

namespace pricce {

EnhancerId enhancer_from_ordinal(int ordinal) {
  if (ordinal < 0 || ordinal >= kEnhancerCount) {
    throw ParameterError("enhancer ordinal " + std::to_string(ordinal) + " out of range 0..6");
  }
  return static_cast<EnhancerId>(ordinal);
}

std::string_view enhancer_name(EnhancerId id) noexcept {
  switch (id) {
    case EnhancerId::HE: return "he";
    case EnhancerId::SimplestCB: return "simplest-cb";
    case EnhancerId::Ying: return "ying";
    case EnhancerId::Cao: return "cao";
    case EnhancerId::DHE: return "dhe";
    case EnhancerId::BPDHE: return "bpdhe";
    case EnhancerId::MSRCR: return "msrcr";
  }
  return "unknown";
}

EnhancerId parse_enhancer(std::string_view name) {
  for (auto id : kAllEnhancers) {
    if (enhancer_name(id) == name) return id;
  }
  throw ParameterError("unknown enhancer '" + std::string(name) +
                       "' (expected he, simplest-cb, ying, cao, dhe, bpdhe or msrcr)");
}

void EnhancerConfig::validate() const {
  auto fail = [](const std::string& m) { throw ParameterError("enhancer config: " + m); };
  for (double f : {simplest_cb.low_fraction, simplest_cb.high_fraction}) {
    if (!(f >= 0.0 && f < 0.25)) fail("simplest-cb tail fractions must lie in [0, 0.25)");
  }
  if (msrcr.sigmas.empty()) fail("msrcr needs at least one scale");
  if (msrcr.sigmas.size() != msrcr.weights.size()) fail("msrcr sigmas and weights differ in length");
  for (double s : msrcr.sigmas) {
    if (!(s > 0.0)) fail("msrcr sigmas must be positive");
  }
  for (double w : msrcr.weights) {
    if (!(w >= 0.0)) fail("msrcr weights must be non-negative");
  }
  const double wsum = std::accumulate(msrcr.weights.begin(), msrcr.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-9) fail("msrcr weights must sum to 1");
  if (!(msrcr.alpha > 0.0)) fail("msrcr alpha must be positive");
  if (!(msrcr.tail_fraction >= 0.0 && msrcr.tail_fraction < 0.5)) fail("msrcr tail fraction must lie in [0, 0.5)");
  if (dhe.smooth_width < 1) fail("dhe smooth width must be >= 1");
  if (!(bpdhe.smooth_sigma > 0.0) || bpdhe.smooth_radius < 1) fail("bpdhe smoothing must be positive");
  if (!(ying.k_min >= 1.0 && ying.k_max >= ying.k_min)) fail("ying exposure range must satisfy 1 <= k_min <= k_max");
  if (!(ying.k_step > 0.0)) fail("ying k_step must be positive");
  if (!(ying.mu > 0.0)) fail("ying mu must be positive");
  if (!(ying.illumination_sigma > 0.0) || ying.illumination_radius < 1) fail("ying illumination smoothing must be positive");
  if (!(cao.exponent > 0.0)) fail("cao exponent must be positive");
}

RasterImage enhance(const RasterImage& img, EnhancerId id, const EnhancerConfig& cfg) {
  cfg.validate();
  switch (id) {
    case EnhancerId::HE: return he(img);
    case EnhancerId::SimplestCB: return simplest_cb(img, cfg);
    case EnhancerId::Ying: return ying(img, cfg);
    case EnhancerId::Cao: return cao(img, cfg);
    case EnhancerId::DHE: return dhe(img, cfg);
    case EnhancerId::BPDHE: return bpdhe(img, cfg);
    case EnhancerId::MSRCR: return msrcr(img, cfg);
  }
  throw ParameterError("unknown enhancer ordinal " + std::to_string(ordinal(id)));
}

}  // namespace pricce
