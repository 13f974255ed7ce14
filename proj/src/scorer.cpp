#include "pricce/scorer.hpp"

#include <string>

#include "pricce/error.hpp"
#include "pricce/image_io.hpp"

namespace pricce {

namespace {

// Re-throws the active pricce::Error with `stage` prefixed, keeping its type.
[[noreturn]] void rethrow_with_stage(const std::string& stage) {
  try {
    throw;
  } catch (const ModelError& e) {
    throw ModelError(e.kind(), stage + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(stage + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(stage + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(stage + ": " + e.what());
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(stage + ": " + e.what());
  } catch (const Error& e) {
    throw Error(stage + ": " + e.what());
  }
}

template <class F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error&) {
    rethrow_with_stage(stage);
  }
}

}  // namespace

PricceResult score_with_prediction(const RasterImage& dist, const Prediction& prediction, const EnhancerConfig& cfg,
                                   const ScoreOptions& opts) {
  const RasterImage pseudo = in_stage("enhance", [&] { return enhance(dist, prediction.label, cfg); });
  const MetricScore s = in_stage("compare", [&] { return compare(pseudo, dist, opts.fr); });
  PricceResult r{s.value, prediction.label, opts.fr, prediction, std::nullopt};
  if (opts.dump_pseudo) {
    write_image(*opts.dump_pseudo, pseudo);
    r.pseudo_ref_path = *opts.dump_pseudo;
  }
  return r;
}

PricceResult pricce_score(const RasterImage& dist, const ModelHandle& model, const EnhancerConfig& cfg,
                          const ScoreOptions& opts) {
  const Prediction p = in_stage("classify", [&] { return predict(model, dist); });
  return score_with_prediction(dist, p, cfg, opts);
}

PricceResult pricce_score_oracle(const RasterImage& dist, const RasterImage& ref, const EnhancerConfig& cfg,
                                 const ScoreOptions& opts) {
  const Prediction p = in_stage("classify", [&] { return oracle_predict(ref, dist, cfg); });
  return score_with_prediction(dist, p, cfg, opts);
}

}  // namespace pricce
