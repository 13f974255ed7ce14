#include "pricce/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "pricce/benchmark.hpp"
#include "pricce/classifier.hpp"
#include "pricce/dataset.hpp"
#include "pricce/distort.hpp"
#include "pricce/enhance.hpp"
#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"
#include "pricce/image_io.hpp"
#include "pricce/metrics.hpp"
#include "pricce/scorer.hpp"

namespace pricce::cli {

namespace {

struct Options {
  int jobs = 0;
  std::string log_level = "warn";
  std::string config_path;

  std::string in, out, ref, test, method, metric = "ms-ssim", family, model, list, manifest;
  std::string refs, dump_pseudo, oracle_ref, dataset, mos, scores, report, scatter, svg;
  int level = 0;
  bool list_catalog = false;
};

EnhancerConfig load_config(const Options& o) {
  if (o.config_path.empty()) return {};
  const std::string text = read_file_text(o.config_path);
  try {
    if (std::filesystem::path(o.config_path).extension() == ".json") return enhancer_config_from_json_string(text);
    return parse_enhancer_config(text);
  } catch (const ParameterError& e) {
    throw ParameterError(o.config_path + ": " + e.what());
  }
}

void cmd_distort(const Options& o, std::ostream& out) {
  if (o.list_catalog) {
    for (const auto& spec : catalog()) {
      out << family_name(spec.family()) << " " << *spec.catalog_level() << " " << spec.describe() << "\n";
    }
    return;
  }
  if (o.in.empty() || o.out.empty() || o.family.empty() || o.level == 0) {
    throw CLI::ValidationError("distort", "--in, --out, --family and --level are required unless --list is given");
  }
  const auto spec = DistortionSpec::from_catalog(parse_family(o.family), o.level);
  write_image(o.out, apply_distortion(read_image(o.in), spec));
  spdlog::info("wrote {} ({})", o.out, spec.describe());
}

void cmd_enhance(const Options& o) {
  const EnhancerConfig cfg = load_config(o);
  write_image(o.out, enhance(read_image(o.in), parse_enhancer(o.method), cfg));
}

void cmd_compare(const Options& o, std::ostream& out) {
  const MetricId id = parse_metric(o.metric);
  out << format_score(compare(read_image(o.ref), read_image(o.test), id).value) << "\n";
}

void cmd_gen_dataset(const Options& o, std::ostream& out) {
  const auto res = generate(o.refs, o.out, load_config(o), GenerateOptions{o.jobs});
  out << "records " << res.manifest.records.size() << "\n"
      << "computed " << res.computed << "\n"
      << "reused " << res.reused << "\n"
      << "rejects " << res.rejects.size() << "\n";
  for (const auto& r : res.rejects) spdlog::warn("rejected: {}", r);
}

int cmd_audit(const Options& o, std::ostream& out) {
  const auto rep = audit_manifest(read_manifest(o.manifest));
  for (const auto& p : rep.problems) out << "problem " << p << "\n";
  out << (rep.ok() ? "ok " : "failed ") << rep.records << " records\n";
  return rep.ok() ? kOk : kDataError;
}

void print_prediction(const Prediction& p, std::ostream& out) {
  out << enhancer_name(p.label) << "\n";
  for (auto id : kAllEnhancers) {
    out << enhancer_name(id) << " " << format_score(p.probabilities[static_cast<std::size_t>(ordinal(id))]) << "\n";
  }
}

void cmd_classify(const Options& o, std::ostream& out) {
  const ModelHandle m = load_model(o.model);
  print_prediction(predict(m, read_image(o.in)), out);
}

void cmd_score(const Options& o, std::ostream& out) {
  if (o.model.empty() == o.oracle_ref.empty()) {
    throw CLI::ValidationError("score", "exactly one of --model or --oracle-ref is required");
  }
  const EnhancerConfig cfg = load_config(o);
  ScoreOptions so{parse_metric(o.metric), std::nullopt};
  if (!o.dump_pseudo.empty()) so.dump_pseudo = o.dump_pseudo;
  const RasterImage dist = read_image(o.in);
  const PricceResult r = o.model.empty() ? pricce_score_oracle(dist, read_image(o.oracle_ref), cfg, so)
                                         : pricce_score(dist, load_model(o.model), cfg, so);
  out << format_score(r.score) << " " << enhancer_name(r.chosen_enhancer) << " " << metric_name(r.fr_metric) << "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void cmd_score_batch(const Options& o) {
  const EnhancerConfig cfg = load_config(o);
  const ModelHandle model = load_model(o.model);
  const MetricId fr = parse_metric(o.metric);
  std::vector<std::string> paths;
  {
    std::istringstream in(read_file_text(o.list));
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty() && line.front() != '#') paths.push_back(line);
    }
  }
  std::vector<std::optional<PricceResult>> results(paths.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      try {
        results[i] = pricce_score(read_image(paths[i]), model, cfg, ScoreOptions{fr, std::nullopt});
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::make_exception_ptr(Error(paths[i] + ": " + e.what()));
        next = paths.size();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = paths.size();
      }
    }
  };
  const int jobs = std::clamp<int>(o.jobs, 1, static_cast<int>(std::max<std::size_t>(paths.size(), 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::string csv = "path,score,enhancer,fr\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    csv += csv_field(paths[i]) + "," + format_score(results[i]->score) + "," +
           std::string(enhancer_name(results[i]->chosen_enhancer)) + "," + std::string(metric_name(fr)) + "\n";
  }
  atomic_write(o.out, csv);
  spdlog::info("scored {} images", paths.size());
}

void cmd_evaluate(const Options& o, std::ostream& out) {
  const auto res = run_benchmark(parse_dataset(o.dataset), o.mos, o.scores);
  const std::string json = report_to_json(res.report);
  if (!o.report.empty()) atomic_write(o.report, json);
  if (!o.scatter.empty()) atomic_write(o.scatter, scatter_to_csv(res.scatter));
  if (!o.svg.empty()) atomic_write(o.svg, scatter_to_svg(res.scatter, res.report));
  out << json;
}

class LoggerScope {
 public:
  LoggerScope(std::ostream& err) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("pricce", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(spdlog::level::warn);
    spdlog::set_default_logger(logger);
  }
  ~LoggerScope() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

std::string format_score(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

int resolve_jobs(int flag_value, const char* env_value) {
  if (flag_value > 0) return flag_value;
  if (env_value && *env_value) {
    int v = 0;
    const char* end = env_value + std::char_traits<char>::length(env_value);
    auto [p, ec] = std::from_chars(env_value, end, v);
    if (ec != std::errc() || p != end || v < 1) {
      throw ParameterError(std::string(kJobsEnv) + " must be a positive integer, got '" + env_value + "'");
    }
    return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  LoggerScope logging(err);
  Options o;
  CLI::App app{"PRICCE: no-reference quality assessment of contrast-distorted images", "pricce"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("pricce ") + kArtifactVersion + " (catalog " +
                                        std::string(kCatalogVersion) + ")");
  app.add_option("--jobs", o.jobs, "Worker threads (default: $PRICCE_JOBS, then CPU count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--config", o.config_path, "Enhancer parameter file (key = value, or .json)")
      ->check(CLI::ExistingFile);

  auto* distort = app.add_subcommand("distort", "Apply a catalog distortion preset");
  distort->add_flag("--list", o.list_catalog, "Print the preset catalog");
  distort->add_option("--in", o.in, "Input image");
  distort->add_option("--out", o.out, "Output image (.png or .bmp)");
  distort->add_option("--family", o.family, "contrast-change, gamma, logistic, cubic or mean-shift");
  distort->add_option("--level", o.level, "1-based level within the family");

  auto* enh = app.add_subcommand("enhance", "Run one contrast enhancer");
  enh->add_option("--in", o.in, "Input image")->required();
  enh->add_option("--out", o.out, "Output image")->required();
  enh->add_option("--algo", o.method, "he, simplest-cb, ying, cao, dhe, bpdhe or msrcr")->required();

  auto* cmp = app.add_subcommand("compare", "Full-reference score between two images");
  cmp->add_option("--metric", o.metric, "psnr, ssim, ms-ssim, gmsd or vif")->required();
  cmp->add_option("--ref", o.ref, "Reference image")->required();
  cmp->add_option("--test", o.test, "Test image")->required();

  auto* gen = app.add_subcommand("gen-dataset", "Distort and label a reference set");
  gen->add_option("--refs", o.refs, "Directory of reference images")->required();
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* audit = app.add_subcommand("audit-manifest", "Re-check labels in a manifest");
  audit->add_option("manifest", o.manifest, "manifest.jsonl")->required();

  auto* cls = app.add_subcommand("classify", "Predict the enhancer for an image");
  cls->add_option("--model", o.model, "ONNX model")->required();
  cls->add_option("--in", o.in, "Input image")->required();

  auto* score = app.add_subcommand("score", "PRICCE score of one image");
  score->add_option("--model", o.model, "ONNX model");
  score->add_option("--oracle-ref", o.oracle_ref, "Pick the enhancer with this reference instead of a model");
  score->add_option("--in", o.in, "Distorted image")->required();
  score->add_option("--fr", o.metric, "FR metric (default ms-ssim)");
  score->add_option("--dump-pseudo", o.dump_pseudo, "Write the pseudo-reference here");

  auto* batch = app.add_subcommand("score-batch", "PRICCE scores for a list of images");
  batch->add_option("--model", o.model, "ONNX model")->required();
  batch->add_option("--list", o.list, "Text file, one image path per line")->required();
  batch->add_option("--out", o.out, "Output CSV (path,score,enhancer,fr)")->required();
  batch->add_option("--fr", o.metric, "FR metric (default ms-ssim)");

  auto* eval = app.add_subcommand("evaluate", "Correlate scores with subjective ratings");
  eval->add_option("--dataset", o.dataset, "tid2013, csiq or ccid2014")->required();
  eval->add_option("--mos", o.mos, "Subjective score file")->required();
  eval->add_option("--scores", o.scores, "CSV from score-batch")->required();
  eval->add_option("--report", o.report, "JSON report path");
  eval->add_option("--scatter", o.scatter, "Scatter CSV path");
  eval->add_option("--svg", o.svg, "Optional scatter plot");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(o.log_level));
    o.jobs = resolve_jobs(o.jobs, std::getenv(kJobsEnv));
    if (*distort) cmd_distort(o, out);
    else if (*enh) cmd_enhance(o);
    else if (*cmp) cmd_compare(o, out);
    else if (*gen) cmd_gen_dataset(o, out);
    else if (*audit) return cmd_audit(o, out);
    else if (*cls) cmd_classify(o, out);
    else if (*score) cmd_score(o, out);
    else if (*batch) cmd_score_batch(o);
    else if (*eval) cmd_evaluate(o, out);
    out.flush();
    return kOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace pricce::cli
