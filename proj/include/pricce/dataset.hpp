#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "pricce/distort.hpp"
#include "pricce/enhance.hpp"
#include "pricce/image.hpp"
#include "pricce/metrics.hpp"

namespace pricce {

using EnhancerScores = std::array<double, kEnhancerCount>;

struct LabelResult {
  EnhancerId label;
  EnhancerScores scores;
  double margin;  ///< winner minus runner-up
};

/// Argmax with ties going to the lowest ordinal.
LabelResult select_label(const EnhancerScores& scores);

/// Labels `dist` with whichever of the seven enhancements `enhance_fn(dist, id)`
/// yields is judged closest to `ref` by VIF.
template <class EnhanceFn>
LabelResult label_sample_with(const RasterImage& ref, const RasterImage& dist, EnhanceFn&& enhance_fn) {
  const FloatPlane ref_luma = to_gray(ref);
  EnhancerScores scores{};
  for (auto id : kAllEnhancers) {
    const RasterImage out = enhance_fn(dist, id);
    scores[static_cast<std::size_t>(ordinal(id))] = vif(ref_luma, to_gray(out)).value;
  }
  return select_label(scores);
}

LabelResult label_sample(const RasterImage& ref, const RasterImage& dist, const EnhancerConfig& cfg);

struct SampleRecord {
  std::string sample_id;
  std::string ref_path;
  std::string dist_path;  ///< relative to the manifest's directory
  DistortionSpec spec;
  EnhancerScores vif_scores;
  EnhancerId label;
  double label_margin;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;
  EnhancerConfig enhancer_config;
  std::string catalog_version{kCatalogVersion};
};

inline constexpr const char* kManifestFileName = "manifest.jsonl";

std::string manifest_to_jsonl(const DatasetManifest& m);
DatasetManifest manifest_from_jsonl(std::string_view text);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct AuditReport {
  std::size_t records = 0;
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Re-checks label = argmax(vif_scores), margins and sample_id uniqueness.
AuditReport audit_manifest(const DatasetManifest& m);

struct GenerateOptions {
  int jobs = 1;
};

struct GenerateResult {
  DatasetManifest manifest;
  std::size_t computed = 0;
  std::size_t reused = 0;
  std::vector<std::string> rejects;
};

/// Distorts every reference with every catalog preset, labels each sample and
/// writes `manifest.jsonl` plus `distorted/*.png` under `out_dir`. Re-running
/// reuses records that are already complete.
GenerateResult generate(const std::filesystem::path& refs_dir, const std::filesystem::path& out_dir,
                        const EnhancerConfig& cfg, const GenerateOptions& opts = {});

std::array<std::size_t, kEnhancerCount> class_counts(const DatasetManifest& m);

}  // namespace pricce
