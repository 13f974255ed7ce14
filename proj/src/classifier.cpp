#include "pricce/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pricce/dataset.hpp"
#include "pricce/error.hpp"
#include "pricce/onnx_runtime.hpp"

namespace pricce {

namespace {

using Kind = ModelError::Kind;

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const auto j = nlohmann::json::parse(text);
    for (const auto& v : j) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return out;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

std::array<double, 3> parse_triple(const std::map<std::string, std::string>& meta, const char* key,
                                   const std::string& origin) {
  auto it = meta.find(key);
  if (it == meta.end()) throw ModelError(Kind::Metadata, origin + ": metadata key '" + key + "' is missing");
  std::vector<std::string> items;
  try {
    items = parse_list(it->second);
  } catch (const nlohmann::json::exception&) {
    items.clear();
  }
  std::array<double, 3> out{};
  bool ok = items.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) {
    try {
      std::size_t used = 0;
      out[i] = std::stod(items[i], &used);
      ok = used == items[i].size() && std::isfinite(out[i]);
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (!ok) throw ModelError(Kind::Metadata, origin + ": metadata '" + key + "' must hold 3 numbers");
  return out;
}

onnx::Tensor preprocess(const ModelHandle& m, const RasterImage& img) {
  const int side = m.input_side();
  std::vector<float> chw = resize_bilinear_chw(img, side);
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  for (int c = 0; c < 3; ++c) {
    const double mu = m.norm_mean()[static_cast<std::size_t>(c)];
    const double sd = m.norm_std()[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < plane; ++i) {
      auto& v = chw[static_cast<std::size_t>(c) * plane + i];
      v = static_cast<float>((v / 255.0 - mu) / sd);
    }
  }
  return {{1, 3, side, side}, std::move(chw)};
}

EnhancerId argmax_label(const std::array<double, kEnhancerCount>& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return enhancer_from_ordinal(static_cast<int>(best));
}

}  // namespace

std::vector<float> resize_bilinear_chw(const RasterImage& img_in, int side) {
  const RasterImage img = ensure_rgb(img_in);
  const int w = img.width(), h = img.height();
  const double sx = static_cast<double>(w) / side, sy = static_cast<double>(h) / side;
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  std::vector<float> out(3 * plane);
  for (int y = 0; y < side; ++y) {
    const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
    const int y0 = std::min(static_cast<int>(fy), h - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < side; ++x) {
      const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
      const int x0 = std::min(static_cast<int>(fx), w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
        out[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * side + x] =
            static_cast<float>(top * (1.0 - wy) + bot * wy);
      }
    }
  }
  return out;
}

ModelHandle load_model(const std::filesystem::path& path) {
  auto model = std::make_shared<onnx::Model>(onnx::Model::load(path));
  const std::string origin = path.string();
  ModelHandle h;
  h.source_ = path;

  const auto& in = model->input_shape();
  if (!in.empty()) {
    if (in.size() != 4 || (in[1] != 3 && in[1] != -1)) {
      throw ModelError(Kind::Unsupported, origin + ": input must be N x 3 x H x W");
    }
    for (std::size_t d = 2; d < 4; ++d) {
      if (in[d] != -1 && in[d] != kModelInputSide) {
        throw ModelError(Kind::Unsupported, origin + ": input side is " + std::to_string(in[d]) + ", expected " +
                                                std::to_string(kModelInputSide));
      }
    }
  }
  const auto& out = model->output_shape();
  if (!out.empty() && out.back() > 0 && out.back() != kEnhancerCount) {
    throw ModelError(Kind::ClassCount, origin + ": model has " + std::to_string(out.back()) + " output classes, expected " +
                                           std::to_string(kEnhancerCount));
  }

  const auto& meta = model->metadata();
  auto co = meta.find(kMetaClassOrder);
  if (co == meta.end()) {
    throw ModelError(Kind::Metadata, origin + ": metadata key '" + std::string(kMetaClassOrder) + "' is missing");
  }
  std::vector<std::string> names;
  try {
    names = parse_list(co->second);
  } catch (const nlohmann::json::exception&) {
    throw ModelError(Kind::Metadata, origin + ": class_order is not a valid list");
  }
  if (names.size() != kEnhancerCount) {
    throw ModelError(Kind::ClassCount, origin + ": class_order lists " + std::to_string(names.size()) +
                                           " classes, expected " + std::to_string(kEnhancerCount));
  }
  std::set<EnhancerId> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    try {
      h.class_order_[i] = parse_enhancer(names[i]);
    } catch (const ParameterError& e) {
      throw ModelError(Kind::Metadata, origin + ": class_order: " + e.what());
    }
    if (!seen.insert(h.class_order_[i]).second) {
      throw ModelError(Kind::Metadata, origin + ": class_order repeats '" + names[i] + "'");
    }
  }
  h.mean_ = parse_triple(meta, kMetaNormMean, origin);
  h.std_ = parse_triple(meta, kMetaNormStd, origin);
  for (double s : h.std_) {
    if (!(s > 0.0)) throw ModelError(Kind::Metadata, origin + ": normalization_std must be positive");
  }
  if (auto it = meta.find(kMetaOutput); it != meta.end()) {
    if (it->second == "probabilities") {
      h.outputs_probabilities_ = true;
    } else if (it->second != "logits") {
      throw ModelError(Kind::Metadata, origin + ": metadata 'output' must be 'logits' or 'probabilities'");
    }
  }
  if (auto it = meta.find(kMetaResize); it != meta.end() && it->second != "bilinear") {
    throw ModelError(Kind::Metadata, origin + ": model expects '" + it->second + "' resizing; only bilinear is implemented");
  }
  h.model_ = std::move(model);

  // Dry run so runtime problems and dynamic output sizes surface at load.
  onnx::Tensor probe{{1, 3, kModelInputSide, kModelInputSide},
                     std::vector<float>(3 * static_cast<std::size_t>(kModelInputSide) * kModelInputSide, 0.0f)};
  onnx::Tensor result;
  try {
    result = h.model_->run(probe);
  } catch (const ModelError& e) {
    throw ModelError(e.kind(), origin + ": " + e.what());
  }
  if (result.numel() != kEnhancerCount) {
    throw ModelError(Kind::ClassCount, origin + ": model produces " + std::to_string(result.numel()) +
                                           " outputs, expected " + std::to_string(kEnhancerCount));
  }
  return h;
}

std::vector<double> model_outputs(const ModelHandle& model, const RasterImage& img) {
  onnx::Tensor out;
  try {
    out = model.model().run(preprocess(model, img));
  } catch (const ModelError& e) {
    throw ModelError(e.kind(), model.source().string() + ": " + e.what());
  }
  return {out.data.begin(), out.data.end()};
}

Prediction prediction_from_logits(std::span<const double> logits,
                                  const std::array<EnhancerId, kEnhancerCount>& class_order) {
  if (logits.size() != kEnhancerCount) {
    throw ModelError(Kind::ClassCount, "expected " + std::to_string(kEnhancerCount) + " logits, got " +
                                           std::to_string(logits.size()));
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::array<double, kEnhancerCount> e{};
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) sum += e[i] = std::exp(logits[i] - mx);
  for (auto& v : e) v /= sum;
  return prediction_from_probabilities(e, class_order);
}

Prediction prediction_from_probabilities(std::span<const double> probs,
                                         const std::array<EnhancerId, kEnhancerCount>& class_order) {
  if (probs.size() != kEnhancerCount) {
    throw ModelError(Kind::ClassCount, "expected " + std::to_string(kEnhancerCount) + " probabilities, got " +
                                           std::to_string(probs.size()));
  }
  Prediction p{};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw ModelError(Kind::Runtime, "model produced a negative probability");
    p.probabilities[static_cast<std::size_t>(ordinal(class_order[i]))] = probs[i];
  }
  p.label = argmax_label(p.probabilities);
  return p;
}

Prediction predict(const ModelHandle& model, const RasterImage& img) {
  const auto out = model_outputs(model, img);
  return model.outputs_probabilities() ? prediction_from_probabilities(out, model.class_order())
                                       : prediction_from_logits(out, model.class_order());
}

Prediction oracle_predict(const RasterImage& ref, const RasterImage& dist, const EnhancerConfig& cfg) {
  const LabelResult r = label_sample(ref, dist, cfg);
  Prediction p{};
  p.label = r.label;
  p.probabilities[static_cast<std::size_t>(ordinal(r.label))] = 1.0;
  return p;
}

}  // namespace pricce
