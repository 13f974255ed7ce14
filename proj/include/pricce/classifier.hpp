#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "pricce/enhance.hpp"
#include "pricce/image.hpp"

namespace pricce {

namespace onnx {
class Model;
}

struct Prediction {
  EnhancerId label;
  std::array<double, kEnhancerCount> probabilities;  ///< indexed by EnhancerId ordinal
};

inline constexpr int kModelInputSide = 224;

/// Metadata keys a model file must carry.
inline constexpr const char* kMetaClassOrder = "class_order";
inline constexpr const char* kMetaNormMean = "normalization_mean";
inline constexpr const char* kMetaNormStd = "normalization_std";
/// Optional: "logits" (default) or "probabilities" when the graph ends in a softmax.
inline constexpr const char* kMetaOutput = "output";
/// Optional: must be "bilinear" if present.
inline constexpr const char* kMetaResize = "resize";

/// A loaded, validated classifier. Immutable; copies share the model.
class ModelHandle {
 public:
  const std::filesystem::path& source() const noexcept { return source_; }
  int input_side() const noexcept { return input_side_; }
  /// Model output index -> EnhancerId.
  const std::array<EnhancerId, kEnhancerCount>& class_order() const noexcept { return class_order_; }
  const std::array<double, 3>& norm_mean() const noexcept { return mean_; }
  const std::array<double, 3>& norm_std() const noexcept { return std_; }
  bool outputs_probabilities() const noexcept { return outputs_probabilities_; }
  const onnx::Model& model() const noexcept { return *model_; }

 private:
  friend ModelHandle load_model(const std::filesystem::path& path);
  std::filesystem::path source_;
  int input_side_ = kModelInputSide;
  std::array<EnhancerId, kEnhancerCount> class_order_{};
  std::array<double, 3> mean_{};
  std::array<double, 3> std_{};
  bool outputs_probabilities_ = false;
  std::shared_ptr<const onnx::Model> model_;
};

/// Throws ModelError; the kind distinguishes missing file, parse failure,
/// class-count mismatch and missing/invalid metadata.
ModelHandle load_model(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers and no antialiasing; returns a
/// planar CHW float buffer in [0,255].
std::vector<float> resize_bilinear_chw(const RasterImage& img, int side);

/// Raw model outputs in model order.
std::vector<double> model_outputs(const ModelHandle& model, const RasterImage& img);

/// Softmax over `logits` (model order), reordered into EnhancerId order.
Prediction prediction_from_logits(std::span<const double> logits,
                                  const std::array<EnhancerId, kEnhancerCount>& class_order);
/// Probabilities already normalized, in model order.
Prediction prediction_from_probabilities(std::span<const double> probs,
                                         const std::array<EnhancerId, kEnhancerCount>& class_order);

Prediction predict(const ModelHandle& model, const RasterImage& img);

/// Reference-assisted upper bound: the labeling rule, one-hot.
Prediction oracle_predict(const RasterImage& ref, const RasterImage& dist, const EnhancerConfig& cfg);

}  // namespace pricce
