#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "pricce/cli.hpp"
#include "pricce/dataset.hpp"
#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"
#include "pricce/image_io.hpp"
#include "pricce/metrics.hpp"
#include "tempdir.hpp"

using namespace pricce;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures(PRICCE_FIXTURES_DIR);
const fs::path kImages = kFixtures / "images";
const std::string kModel = (kFixtures / "models" / "dummy.onnx").string();

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string image(int i) { return (kImages / ("fx0" + std::to_string(i) + ".png")).string(); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, HelpAndVersion) {
  const Result h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("score-batch"), std::string::npos);
  const Result v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("pricce 1.0.0"), std::string::npos);
  EXPECT_NE(v.out.find(kCatalogVersion), std::string::npos);
  EXPECT_EQ(run({"compare", "--help"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"compare", "--metric", "ms-ssim"}).code, 1);
  EXPECT_EQ(run({"--jobs", "0", "distort", "--list"}).code, 1);
  EXPECT_EQ(run({"--log-level", "loud", "distort", "--list"}).code, 1);
  EXPECT_EQ(run({"distort", "--in", image(0)}).code, 1);
  EXPECT_EQ(run({"score", "--in", image(0)}).code, 1);
  const Result r = run({"frobnicate"});
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CompareIdentityPrintsOne) {
  const Result r = run({"compare", "--metric", "ms-ssim", "--ref", image(0), "--test", image(0)});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1.0\n");
  EXPECT_EQ(run({"compare", "--metric", "psnr", "--ref", image(0), "--test", image(0)}).out, "100.0\n");
}

TEST(Cli, CompareValueMatchesLibrary) {
  const Result r = run({"compare", "--metric", "vif", "--ref", image(0), "--test", image(1)});
  ASSERT_EQ(r.code, 0) << r.err;
  const double want = compare(read_image(image(0)), read_image(image(1)), MetricId::VIF).value;
  EXPECT_EQ(std::strtod(r.out.c_str(), nullptr), want);
}

TEST(Cli, DataErrorsExitTwo) {
  const Result missing = run({"compare", "--metric", "ssim", "--ref", "/nonexistent.png", "--test", image(0)});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.out.empty());
  EXPECT_NE(missing.err.find("nonexistent"), std::string::npos);
  EXPECT_EQ(run({"compare", "--metric", "dists", "--ref", image(0), "--test", image(0)}).code, 2);
  EXPECT_EQ(run({"classify", "--model", (kFixtures / "models" / "six_class.onnx").string(), "--in", image(0)}).code, 2);
  EXPECT_EQ(run({"distort", "--in", image(0), "--out", "/tmp/x.png", "--family", "cubic", "--level", "9"}).code, 2);
}

TEST(Cli, DistortListAndApply) {
  const Result l = run({"distort", "--list"});
  ASSERT_EQ(l.code, 0);
  EXPECT_EQ(lines(l.out).size(), 33u);
  EXPECT_EQ(lines(l.out)[0].rfind("contrast-change 1 ", 0), 0u);

  support::TempDir dir;
  const std::string out = (dir / "d.png").string();
  const Result r = run({"distort", "--in", image(2), "--out", out, "--family", "mean-shift", "--level", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_image(out),
            apply_distortion(read_image(image(2)), DistortionSpec::from_catalog(DistortionFamily::MeanShift, 3)));
}

TEST(Cli, EnhanceWithConfig) {
  support::TempDir dir;
  const std::string out = (dir / "e.bmp").string();
  ASSERT_EQ(run({"enhance", "--in", image(3), "--out", out, "--algo", "he"}).code, 0);
  EXPECT_EQ(read_image(out), he(read_image(image(3))));

  atomic_write(dir / "cfg.txt", std::string_view("simplest_cb.low_fraction = 0\nsimplest_cb.high_fraction = 0\n"));
  const std::string out2 = (dir / "s.png").string();
  const Result r = run({"--config", (dir / "cfg.txt").string(), "enhance", "--in", image(3), "--out", out2, "--algo",
                        "simplest-cb"});
  ASSERT_EQ(r.code, 0) << r.err;
  EnhancerConfig cfg;
  cfg.simplest_cb = {0.0, 0.0};
  EXPECT_EQ(read_image(out2), simplest_cb(read_image(image(3)), cfg));

  atomic_write(dir / "bad.txt", std::string_view("msrcr.nope = 1\n"));
  EXPECT_EQ(run({"--config", (dir / "bad.txt").string(), "enhance", "--in", image(3), "--out", out2, "--algo", "he"}).code,
            2);
  EXPECT_EQ(run({"enhance", "--in", image(3), "--out", out2, "--algo", "clahe"}).code, 2);
}

TEST(Cli, GenDatasetAndAudit) {
  support::TempDir dir;
  fs::create_directories(dir / "refs");
  fs::copy_file(image(4), dir / "refs" / "r.png");
  const std::string out = (dir / "ds").string();
  const Result g = run({"--jobs", "2", "gen-dataset", "--refs", (dir / "refs").string(), "--out", out});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(g.out, "records 33\ncomputed 33\nreused 0\nrejects 0\n");

  const std::string manifest = (fs::path(out) / kManifestFileName).string();
  const Result a = run({"audit-manifest", manifest});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, "ok 33 records\n");

  DatasetManifest m = read_manifest(manifest);
  m.records[0].label = m.records[0].label == EnhancerId::HE ? EnhancerId::MSRCR : EnhancerId::HE;
  write_manifest(dir / "tampered.jsonl", m);
  const Result t = run({"audit-manifest", (dir / "tampered.jsonl").string()});
  EXPECT_EQ(t.code, 2);
  EXPECT_NE(t.out.find("problem " + m.records[0].sample_id), std::string::npos);

  EXPECT_EQ(run({"gen-dataset", "--refs", (dir / "nothing").string(), "--out", out}).code, 2);
}

TEST(Cli, ClassifyPrintsDistribution) {
  const Result r = run({"classify", "--model", kModel, "--in", image(0)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 8u);
  const auto expected = nlohmann::json::parse(read_file_text(kFixtures / "expected_predictions.json"));
  EXPECT_EQ(l[0], expected.at("fx00.png").at("label").get<std::string>());
  double sum = 0;
  for (std::size_t i = 1; i < 8; ++i) {
    const auto sp = l[i].find(' ');
    EXPECT_EQ(l[i].substr(0, sp), enhancer_name(enhancer_from_ordinal(static_cast<int>(i - 1))));
    sum += std::strtod(l[i].c_str() + sp + 1, nullptr);
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Cli, ScoreModelOracleAndDump) {
  support::TempDir dir;
  const Result m = run({"score", "--model", kModel, "--in", image(5)});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto f = lines(m.out);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].find(" ms-ssim"), std::string::npos);

  const std::string dist = (dir / "d.png").string();
  write_image(dist, apply_distortion(read_image(image(5)), DistortionSpec::gamma_transfer(3.0)));
  const std::string pseudo = (dir / "p.png").string();
  const Result o = run({"score", "--oracle-ref", image(5), "--in", dist, "--fr", "ssim", "--dump-pseudo", pseudo});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream in(o.out);
  double score = 0;
  std::string name, fr;
  in >> score >> name >> fr;
  EXPECT_EQ(fr, "ssim");
  EXPECT_EQ(compare(read_image(pseudo), read_image(dist), MetricId::SSIM).value, score);
  EXPECT_EQ(read_image(pseudo), enhance(read_image(dist), parse_enhancer(name)));

  EXPECT_EQ(run({"score", "--model", kModel, "--oracle-ref", image(5), "--in", dist}).code, 1);
}

TEST(Cli, ScoreBatchAndEvaluate) {
  support::TempDir dir;
  std::string list = "# fixtures\n";
  std::string mos = "name mos\n";
  for (int i = 0; i < 10; ++i) {
    list += image(i) + "\n";
    mos += "fx0" + std::to_string(i) + ".png " + std::to_string(1.0 + 0.37 * ((i * 7) % 10)) + "\n";
  }
  atomic_write(dir / "list.txt", list);
  atomic_write(dir / "mos.txt", mos);
  const std::string csv = (dir / "scores.csv").string();

  const Result b = run({"--jobs", "3", "score-batch", "--model", kModel, "--list", (dir / "list.txt").string(), "--out", csv});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(b.out.empty());
  const auto rows = lines(read_file_text(csv));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "path,score,enhancer,fr");
  EXPECT_EQ(rows[1].rfind(image(0) + ",", 0), 0u);

  const Result single = run({"--jobs", "1", "score-batch", "--model", kModel, "--list", (dir / "list.txt").string(),
                             "--out", (dir / "one.csv").string()});
  ASSERT_EQ(single.code, 0);
  EXPECT_EQ(read_file_text(dir / "one.csv"), read_file_text(csv));

  const std::string report = (dir / "r.json").string();
  const std::string scatter = (dir / "s.csv").string();
  const std::string svg = (dir / "s.svg").string();
  const Result e = run({"evaluate", "--dataset", "ccid2014", "--mos", (dir / "mos.txt").string(), "--scores", csv,
                        "--report", report, "--scatter", scatter, "--svg", svg});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto j = nlohmann::json::parse(e.out);
  EXPECT_EQ(j.at("n"), 10);
  EXPECT_EQ(nlohmann::json::parse(read_file_text(report)), j);
  EXPECT_EQ(lines(read_file_text(scatter)).size(), 11u);
  EXPECT_TRUE(fs::exists(svg));

  atomic_write(dir / "short.txt", std::string_view("fx00.png 3.0\n"));
  const Result miss = run({"evaluate", "--dataset", "ccid2014", "--mos", (dir / "short.txt").string(), "--scores", csv});
  EXPECT_EQ(miss.code, 2);
  EXPECT_NE(miss.err.find("fx01.png"), std::string::npos);

  atomic_write(dir / "bad_list.txt", image(0) + "\n/nonexistent/x.png\n");
  const Result bad = run({"score-batch", "--model", kModel, "--list", (dir / "bad_list.txt").string(), "--out",
                          (dir / "bad.csv").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_FALSE(fs::exists(dir / "bad.csv"));
}

TEST(Cli, LogsStayOnDiagnosticStream) {
  support::TempDir dir;
  const Result r = run({"--log-level", "info", "distort", "--in", image(6), "--out", (dir / "o.png").string(),
                        "--family", "gamma", "--level", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("[info]"), std::string::npos);
}

TEST(Cli, JobsPrecedence) {
  EXPECT_EQ(cli::resolve_jobs(3, "5"), 3);
  EXPECT_EQ(cli::resolve_jobs(0, "5"), 5);
  EXPECT_GE(cli::resolve_jobs(0, nullptr), 1);
  EXPECT_GE(cli::resolve_jobs(0, ""), 1);
  EXPECT_THROW(cli::resolve_jobs(0, "many"), ParameterError);
  EXPECT_THROW(cli::resolve_jobs(0, "0"), ParameterError);
}

TEST(Cli, FormatScore) {
  EXPECT_EQ(cli::format_score(1.0), "1.0");
  EXPECT_EQ(cli::format_score(0.25), "0.25");
  EXPECT_EQ(cli::format_score(100.0), "100.0");
  EXPECT_EQ(std::strtod(cli::format_score(0.1 + 0.2).c_str(), nullptr), 0.1 + 0.2);
}

TEST(CliBinary, ExitCodesFromProcess) {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(PRICCE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("frobnicate"), 1);
  EXPECT_EQ(status("compare --metric ssim --ref /nonexistent.png --test /nonexistent.png"), 2);
  EXPECT_EQ(status("compare --metric ms-ssim --ref " + image(0) + " --test " + image(0)), 0);

  FILE* p = popen((std::string(PRICCE_CLI_PATH) + " compare --metric ms-ssim --ref " + image(1) + " --test " + image(1) +
                   " 2>/dev/null").c_str(), "r");
  ASSERT_NE(p, nullptr);
  char buf[64] = {};
  const std::size_t n = std::fread(buf, 1, sizeof buf - 1, p);
  pclose(p);
  EXPECT_EQ(std::string(buf, n), "1.0\n");
}
