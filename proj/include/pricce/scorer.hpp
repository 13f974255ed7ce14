#pragma once

#include <filesystem>
#include <optional>

#include "pricce/classifier.hpp"
#include "pricce/enhance.hpp"
#include "pricce/metrics.hpp"

namespace pricce {

struct PricceResult {
  double score;
  EnhancerId chosen_enhancer;
  MetricId fr_metric;
  Prediction prediction;
  std::optional<std::filesystem::path> pseudo_ref_path;
};

struct ScoreOptions {
  MetricId fr = MetricId::MSSSIM;
  /// If set, the pseudo-reference is written here (PNG or BMP by extension).
  std::optional<std::filesystem::path> dump_pseudo;
};

/// Classify `dist`, enhance it with the chosen algorithm and score the
/// pseudo-reference against `dist`. Errors carry a "classify", "enhance" or
/// "compare" prefix.
PricceResult pricce_score(const RasterImage& dist, const ModelHandle& model, const EnhancerConfig& cfg,
                          const ScoreOptions& opts = {});

/// Same pipeline with the oracle label. `ref` only picks the enhancer.
PricceResult pricce_score_oracle(const RasterImage& dist, const RasterImage& ref, const EnhancerConfig& cfg,
                                 const ScoreOptions& opts = {});

/// The pipeline after classification; exposed for callers with their own
/// label source.
PricceResult score_with_prediction(const RasterImage& dist, const Prediction& prediction, const EnhancerConfig& cfg,
                                   const ScoreOptions& opts = {});

}  // namespace pricce
