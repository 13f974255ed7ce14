#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pricce/evalstats.hpp"

namespace pricce {

enum class BenchmarkDataset { TID2013, CSIQ, CCID2014 };

BenchmarkDataset parse_dataset(std::string_view name);
std::string_view dataset_name(BenchmarkDataset d) noexcept;

/// One subjective rating keyed by image file name.
struct SubjectiveEntry {
  std::string name;
  double value;
};

struct SubjectiveTable {
  std::vector<SubjectiveEntry> entries;
  Polarity polarity;
};

/// TID2013 `mos_with_names.txt`: "<mos> <file>" per line; keeps distortion
/// types 16 (contrast change) and 17 (mean shift).
SubjectiveTable load_tid2013(std::string_view text);
/// CSIQ DMOS exported as CSV with a header naming at least `image`,
/// `dst_type`, `dst_lev` and `dmos` (a `file` column overrides the built
/// name `<image>.<dst_type>.<dst_lev>.png`); keeps contrast rows.
SubjectiveTable load_csiq(std::string_view text);
/// CCID2014: two columns (file name and MOS, either order), whitespace or
/// comma separated.
SubjectiveTable load_ccid2014(std::string_view text);
SubjectiveTable load_subjective(BenchmarkDataset d, const std::filesystem::path& path);

/// One row of a `score-batch` CSV.
struct ObjectiveEntry {
  std::string path;
  double score;
  std::string enhancer;
  std::string fr;
};

std::vector<ObjectiveEntry> parse_score_csv(std::string_view text);

struct EvalReport {
  std::string dataset_name;
  std::string fr_metric;
  std::size_t n = 0;
  double srocc = 0.0;
  double krocc = 0.0;
  double plcc = 0.0;
  double rmse = 0.0;
  LogisticFit fit;
  /// "MOS" or "DMOS (negated)".
  std::string subjective_scale;
  bool objective_negated = false;
  /// Set when the fit failed and PLCC/RMSE use raw scores.
  bool raw_plcc = false;
};

struct ScatterRow {
  std::string name;
  double objective;
  double fitted;
  double subjective;
};

struct BenchmarkResult {
  EvalReport report;
  std::vector<ScatterRow> scatter;
};

/// Joins subjective and objective scores on lower-cased file name, fixes
/// polarity so higher is better on both sides, and computes all criteria.
BenchmarkResult evaluate_scores(const SubjectiveTable& subjective, const std::vector<ObjectiveEntry>& objective,
                                std::string name);
BenchmarkResult run_benchmark(BenchmarkDataset d, const std::filesystem::path& mos_file,
                              const std::filesystem::path& scores_csv);

std::string report_to_json(const EvalReport& r);
std::string scatter_to_csv(const std::vector<ScatterRow>& rows);
std::string scatter_to_svg(const std::vector<ScatterRow>& rows, const EvalReport& r);

}  // namespace pricce
