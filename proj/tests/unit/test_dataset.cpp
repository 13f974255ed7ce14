#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "pricce/dataset.hpp"
#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"
#include "pricce/image_io.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace pricce;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures(PRICCE_FIXTURES_DIR);

SampleRecord make_record(const std::string& id, EnhancerScores scores) {
  const LabelResult l = select_label(scores);
  return {id, "refs/a.png", "distorted/" + id + ".png", DistortionSpec::gamma_transfer(2.0), scores, l.label, l.margin};
}

}  // namespace

TEST(SelectLabel, ArgmaxAndMargin) {
  const LabelResult l = select_label({0.1, 0.5, 0.9, 0.3, 0.7, 0.2, 0.0});
  EXPECT_EQ(l.label, EnhancerId::Ying);
  EXPECT_DOUBLE_EQ(l.margin, 0.9 - 0.7);
}

TEST(SelectLabel, TieGoesToLowestOrdinal) {
  const LabelResult l = select_label({0.1, 0.8, 0.2, 0.8, 0.8, 0.2, 0.0});
  EXPECT_EQ(l.label, EnhancerId::SimplestCB);
  EXPECT_EQ(l.margin, 0.0);
}

TEST(LabelSample, EnhancerReturningReferenceWins) {
  const RasterImage ref = support::natural_image(32, 32, 1);
  const RasterImage dist = apply_distortion(ref, DistortionSpec::mean_shift(-40));
  const LabelResult l = label_sample_with(ref, dist, [&](const RasterImage& d, EnhancerId id) {
    return id == EnhancerId::BPDHE ? ref : d;
  });
  EXPECT_EQ(l.label, EnhancerId::BPDHE);
  EXPECT_NEAR(l.scores[5], 1.0, 1e-6);
}

TEST(LabelSample, TiedFakeEnhancers) {
  const RasterImage ref = support::natural_image(32, 32, 2);
  const RasterImage dist = apply_distortion(ref, DistortionSpec::gamma_transfer(3.0));
  const LabelResult l = label_sample_with(ref, dist, [&](const RasterImage& d, EnhancerId id) {
    return id == EnhancerId::Cao || id == EnhancerId::MSRCR ? ref : d;
  });
  EXPECT_EQ(l.label, EnhancerId::Cao);
  EXPECT_EQ(l.margin, 0.0);
}

TEST(LabelSample, MatchesBruteForceOracle) {
  const auto& presets = catalog();
  for (int k = 0; k < 5; ++k) {
    const RasterImage ref = read_image(kFixtures / "images" / ("fx0" + std::to_string(k) + ".png"));
    const RasterImage dist = apply_distortion(ref, presets[static_cast<std::size_t>(7 * k + 1)]);
    const LabelResult l = label_sample(ref, dist, EnhancerConfig{});
    const auto o = support::oracle_label(ref, dist, EnhancerConfig{});
    EXPECT_EQ(l.label, o.label);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(l.scores[i], o.scores[i], 1e-9);
  }
}

TEST(LabelSample, Errors) {
  const RasterImage ref = support::natural_image(32, 32, 3);
  EXPECT_THROW(label_sample(ref, RasterImage(32, 48, 3), EnhancerConfig{}), DimensionError);
  EXPECT_THROW(label_sample(RasterImage::rgb(32, 32, 9, 9, 9), ref, EnhancerConfig{}), DegenerateInputError);
}

TEST(Manifest, JsonlRoundTrip) {
  DatasetManifest m;
  m.enhancer_config.cao.exponent = 0.5;
  m.records.push_back(make_record("a__gamma-06", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  m.records.push_back(make_record("b__gamma-06", {1.0 / 3, 0.2, 0.3, 0.4, 0.5, 0.6, 0.1}));
  m.records[1].spec = catalog()[13];
  const std::string text = manifest_to_jsonl(m);
  const DatasetManifest back = manifest_from_jsonl(text);
  EXPECT_EQ(back.catalog_version, kCatalogVersion);
  EXPECT_EQ(back.enhancer_config, m.enhancer_config);
  ASSERT_EQ(back.records.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.records[i].sample_id, m.records[i].sample_id);
    EXPECT_EQ(back.records[i].spec, m.records[i].spec);
    EXPECT_EQ(back.records[i].vif_scores, m.records[i].vif_scores);
    EXPECT_EQ(back.records[i].label, m.records[i].label);
    EXPECT_EQ(back.records[i].label_margin, m.records[i].label_margin);
  }
  EXPECT_EQ(manifest_to_jsonl(back), text);
}

TEST(Manifest, ParseErrorsNameTheLine) {
  DatasetManifest m;
  m.records.push_back(make_record("a", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  std::string text = manifest_to_jsonl(m) + "{\"sample_id\": 3}\n";
  try {
    manifest_from_jsonl(text);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(manifest_from_jsonl(""), ParameterError);
}

TEST(Audit, DetectsProblems) {
  DatasetManifest m;
  m.records.push_back(make_record("a", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  m.records.push_back(make_record("b", {0.9, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  EXPECT_TRUE(audit_manifest(m).ok());
  EXPECT_EQ(audit_manifest(m).records, 2u);

  DatasetManifest dup = m;
  dup.records[1].sample_id = "a";
  EXPECT_FALSE(audit_manifest(dup).ok());

  DatasetManifest wrong = m;
  wrong.records[0].label = EnhancerId::HE;
  EXPECT_FALSE(audit_manifest(wrong).ok());

  DatasetManifest margin = m;
  margin.records[1].label_margin = 0.5;
  EXPECT_FALSE(audit_manifest(margin).ok());
}

TEST(Audit, ClassCounts) {
  DatasetManifest m;
  m.records.push_back(make_record("a", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  m.records.push_back(make_record("b", {0.9, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}));
  m.records.push_back(make_record("c", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8}));
  const auto c = class_counts(m);
  EXPECT_EQ(c[0], 1u);
  EXPECT_EQ(c[6], 2u);
}

TEST(Generate, TwoReferencesAndRerun) {
  support::TempDir dir;
  fs::create_directories(dir / "refs");
  fs::copy_file(kFixtures / "images" / "fx00.png", dir / "refs" / "alpha.png");
  fs::copy_file(kFixtures / "images" / "fx01.png", dir / "refs" / "beta.png");
  fs::copy_file(kFixtures / "bad" / "paletted.png", dir / "refs" / "broken.png");

  const GenerateResult first = generate(dir / "refs", dir / "out", EnhancerConfig{}, {2});
  ASSERT_EQ(first.manifest.records.size(), 66u);
  EXPECT_EQ(first.computed, 66u);
  EXPECT_EQ(first.reused, 0u);
  ASSERT_EQ(first.rejects.size(), 1u);
  EXPECT_NE(first.rejects[0].find("broken.png"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "rejects.txt"));
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.partial.jsonl"));

  const DatasetManifest m = read_manifest(dir / "out" / kManifestFileName);
  ASSERT_EQ(m.records.size(), 66u);
  EXPECT_TRUE(audit_manifest(m).ok());
  EXPECT_EQ(m.records[0].sample_id, "alpha__contrast-change-01");
  for (const auto& r : m.records) ASSERT_TRUE(fs::exists(dir / "out" / r.dist_path)) << r.dist_path;

  const SampleRecord& r5 = m.records[5];
  const RasterImage ref = read_image(r5.ref_path);
  EXPECT_EQ(read_image(dir / "out" / r5.dist_path), apply_distortion(ref, r5.spec));

  const std::string before = read_file_text(dir / "out" / kManifestFileName);
  const GenerateResult second = generate(dir / "refs", dir / "out", EnhancerConfig{}, {1});
  EXPECT_EQ(second.computed, 0u);
  EXPECT_EQ(second.reused, 66u);
  EXPECT_EQ(read_file_text(dir / "out" / kManifestFileName), before);

  fs::remove(dir / "out" / m.records[10].dist_path);
  const GenerateResult third = generate(dir / "refs", dir / "out", EnhancerConfig{}, {1});
  EXPECT_EQ(third.computed, 1u);
  EXPECT_EQ(read_file_text(dir / "out" / kManifestFileName), before);
}

TEST(Generate, ResumesFromPartialFile) {
  support::TempDir dir;
  fs::create_directories(dir / "refs");
  fs::copy_file(kFixtures / "images" / "fx02.png", dir / "refs" / "a.png");
  const GenerateResult full = generate(dir / "refs", dir / "out", EnhancerConfig{});
  const std::string text = read_file_text(dir / "out" / kManifestFileName);

  // Simulate a crash: only a partial log with a torn last line survives.
  std::istringstream lines(text);
  std::string header, line, partial;
  std::getline(lines, header);
  for (int i = 0; i < 10 && std::getline(lines, line); ++i) partial += line + "\n";
  partial += "{\"sample_id\": \"a__";
  fs::remove(dir / "out" / kManifestFileName);
  atomic_write(dir / "out" / "manifest.partial.jsonl", partial);

  const GenerateResult resumed = generate(dir / "refs", dir / "out", EnhancerConfig{});
  EXPECT_EQ(resumed.reused, 10u);
  EXPECT_EQ(resumed.computed, 23u);
  EXPECT_EQ(read_file_text(dir / "out" / kManifestFileName), text);
}

TEST(Generate, ConfigChangeInvalidatesRecords) {
  support::TempDir dir;
  fs::create_directories(dir / "refs");
  fs::copy_file(kFixtures / "images" / "fx03.png", dir / "refs" / "a.png");
  generate(dir / "refs", dir / "out", EnhancerConfig{});
  EnhancerConfig cfg;
  cfg.cao.exponent = 0.5;
  EXPECT_EQ(generate(dir / "refs", dir / "out", cfg).computed, 33u);
}

TEST(Generate, Errors) {
  support::TempDir dir;
  fs::create_directories(dir / "empty");
  EXPECT_THROW(generate(dir / "empty", dir / "out", EnhancerConfig{}), IoError);
  EXPECT_THROW(generate(dir / "missing", dir / "out", EnhancerConfig{}), IoError);
}
