#include "pricce/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"
#include "pricce/image_io.hpp"

namespace pricce {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kPartialFileName = "manifest.partial.jsonl";

ordered_json record_to_json(const SampleRecord& r) {
  ordered_json j;
  j["sample_id"] = r.sample_id;
  j["ref_path"] = r.ref_path;
  j["dist_path"] = r.dist_path;
  ordered_json spec;
  spec["family"] = std::string(family_name(r.spec.family()));
  if (const auto level = r.spec.catalog_level()) spec["level"] = *level;
  spec["params"] = r.spec.param_values();
  j["spec"] = spec;
  ordered_json scores = ordered_json::object();
  for (auto id : kAllEnhancers) scores[std::string(enhancer_name(id))] = r.vif_scores[static_cast<std::size_t>(ordinal(id))];
  j["vif_scores"] = scores;
  j["label"] = std::string(enhancer_name(r.label));
  j["label_margin"] = r.label_margin;
  return j;
}

SampleRecord record_from_json(const nlohmann::json& j) {
  const auto& spec = j.at("spec");
  SampleRecord r{j.at("sample_id").get<std::string>(),
                 j.at("ref_path").get<std::string>(),
                 j.at("dist_path").get<std::string>(),
                 spec_from_values(parse_family(spec.at("family").get<std::string>()),
                                  spec.at("params").get<std::vector<double>>()),
                 {},
                 parse_enhancer(j.at("label").get<std::string>()),
                 j.at("label_margin").get<double>()};
  const auto& scores = j.at("vif_scores");
  for (auto id : kAllEnhancers) {
    r.vif_scores[static_cast<std::size_t>(ordinal(id))] = scores.at(std::string(enhancer_name(id))).get<double>();
  }
  return r;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string sample_id_for(const std::string& stem, const DistortionSpec& spec) {
  const int level = spec.catalog_level().value_or(0);
  std::string id = stem + "__" + std::string(family_name(spec.family())) + "-";
  if (level < 10) id += "0";
  return id + std::to_string(level);
}

}  // namespace

LabelResult select_label(const EnhancerScores& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, scores[i]);
  }
  return {enhancer_from_ordinal(static_cast<int>(best)), scores, scores[best] - runner_up};
}

LabelResult label_sample(const RasterImage& ref, const RasterImage& dist, const EnhancerConfig& cfg) {
  if (ref.width() != dist.width() || ref.height() != dist.height()) {
    throw DimensionError("label_sample: reference and distorted images differ in size");
  }
  cfg.validate();
  return label_sample_with(ref, dist, [&](const RasterImage& img, EnhancerId id) { return enhance(img, id, cfg); });
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  ordered_json header;
  header["catalog_version"] = m.catalog_version;
  header["enhancer_config"] = ordered_json::parse(to_json_string(m.enhancer_config));
  std::string out = header.dump() + "\n";
  for (const auto& r : m.records) out += record_to_json(r).dump() + "\n";
  return out;
}

DatasetManifest manifest_from_jsonl(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        m.catalog_version = j.at("catalog_version").get<std::string>();
        m.enhancer_config = enhancer_config_from_json_string(j.at("enhancer_config").dump());
        have_header = true;
      } else {
        m.records.push_back(record_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParameterError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ParameterError("manifest is empty (missing header line)");
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) { atomic_write(path, manifest_to_jsonl(m)); }

DatasetManifest read_manifest(const fs::path& path) {
  try {
    return manifest_from_jsonl(read_file_text(path));
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

AuditReport audit_manifest(const DatasetManifest& m) {
  AuditReport rep;
  rep.records = m.records.size();
  std::set<std::string> ids;
  for (const auto& r : m.records) {
    if (!ids.insert(r.sample_id).second) rep.problems.push_back(r.sample_id + ": duplicate sample_id");
    const LabelResult expect = select_label(r.vif_scores);
    if (expect.label != r.label) {
      rep.problems.push_back(r.sample_id + ": label " + std::string(enhancer_name(r.label)) +
                             " is not the argmax (" + std::string(enhancer_name(expect.label)) + ")");
    }
    if (!(r.label_margin >= 0.0)) rep.problems.push_back(r.sample_id + ": negative label margin");
    if (std::abs(r.label_margin - expect.margin) > 1e-12) {
      rep.problems.push_back(r.sample_id + ": label margin does not match the scores");
    }
  }
  return rep;
}

std::array<std::size_t, kEnhancerCount> class_counts(const DatasetManifest& m) {
  std::array<std::size_t, kEnhancerCount> c{};
  for (const auto& r : m.records) ++c[static_cast<std::size_t>(ordinal(r.label))];
  return c;
}

GenerateResult generate(const fs::path& refs_dir, const fs::path& out_dir, const EnhancerConfig& cfg,
                        const GenerateOptions& opts) {
  cfg.validate();
  if (!fs::is_directory(refs_dir)) throw IoError("reference directory " + refs_dir.string() + " does not exist");

  std::vector<fs::path> refs;
  for (const auto& e : fs::directory_iterator(refs_dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = lower(e.path().extension().string());
    if (ext == ".png" || ext == ".bmp") refs.push_back(e.path());
  }
  std::sort(refs.begin(), refs.end());
  if (refs.empty()) throw IoError("reference directory " + refs_dir.string() + " contains no PNG/BMP images");

  GenerateResult result;
  result.manifest.enhancer_config = cfg;

  // Records from earlier runs, keyed by sample_id.
  std::map<std::string, SampleRecord> previous;
  auto absorb = [&](const DatasetManifest& m, const std::string& source) {
    if (m.catalog_version != kCatalogVersion || !(m.enhancer_config == cfg)) {
      spdlog::warn("ignoring {}: generated with a different catalog or enhancer config", source);
      return;
    }
    for (const auto& r : m.records) previous.insert_or_assign(r.sample_id, r);
  };
  const fs::path manifest_path = out_dir / kManifestFileName;
  const fs::path partial_path = out_dir / kPartialFileName;
  if (fs::exists(manifest_path)) absorb(read_manifest(manifest_path), manifest_path.string());
  if (fs::exists(partial_path)) {
    // A crash can leave a torn last line; keep every line that parses.
    std::ifstream in(partial_path);
    std::string line;
    DatasetManifest partial;
    partial.enhancer_config = cfg;
    while (std::getline(in, line)) {
      try {
        partial.records.push_back(record_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception&) {
        spdlog::warn("skipping unreadable line in {}", partial_path.string());
      }
    }
    absorb(partial, partial_path.string());
  }

  fs::create_directories(out_dir / "distorted");
  const auto& presets = catalog();

  struct RefSlot {
    fs::path path;
    std::string stem;
    std::once_flag loaded;
    std::optional<RasterImage> image;
    std::string error;
    std::atomic<int> remaining{0};
    std::atomic<bool> reported{false};
    std::mutex mu;
  };
  std::vector<RefSlot> slots(refs.size());
  std::set<std::string> stems;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    slots[i].path = refs[i];
    slots[i].stem = refs[i].stem().string();
    slots[i].remaining = static_cast<int>(presets.size());
    if (!stems.insert(slots[i].stem).second) slots[i].error = "duplicate file stem '" + slots[i].stem + "'";
  }

  std::mutex out_mu;
  std::ofstream partial_out(partial_path, std::ios::app);
  std::vector<SampleRecord> records;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> computed{0}, reused{0};
  std::vector<std::string> rejects;
  std::exception_ptr fatal;

  const std::size_t total_tasks = refs.size() * presets.size();
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= total_tasks) return;
      RefSlot& slot = slots[t / presets.size()];
      const DistortionSpec& spec = presets[t % presets.size()];
      try {
        const std::string id = sample_id_for(slot.stem, spec);
        const std::string dist_rel = "distorted/" + id + ".png";
        const fs::path dist_path = out_dir / dist_rel;

        std::optional<SampleRecord> rec;
        if (auto it = previous.find(id); it != previous.end() && fs::exists(dist_path) &&
                                            it->second.spec == spec && it->second.ref_path == slot.path.string() &&
                                            select_label(it->second.vif_scores).label == it->second.label) {
          rec = it->second;
          ++reused;
        }
        if (!rec) {
          std::call_once(slot.loaded, [&] {
            if (!slot.error.empty()) return;
            try {
              slot.image = ensure_rgb(read_image(slot.path));
            } catch (const Error& e) {
              slot.error = e.what();
            }
          });
          if (!slot.error.empty()) {
            if (!slot.reported.exchange(true)) {
              std::lock_guard lock(out_mu);
              rejects.push_back(slot.path.string() + ": " + slot.error);
            }
            continue;
          }
          const RasterImage dist = apply_distortion(*slot.image, spec);
          write_image(dist_path, dist);
          const LabelResult label = label_sample(*slot.image, dist, cfg);
          rec = SampleRecord{id, slot.path.string(), dist_rel, spec, label.scores, label.label, label.margin};
          ++computed;
          std::lock_guard lock(out_mu);
          partial_out << record_to_json(*rec).dump() << "\n";
          partial_out.flush();
        }
        if (slot.remaining.fetch_sub(1) == 1) {
          std::lock_guard lock(slot.mu);
          slot.image.reset();
        }
        std::lock_guard lock(out_mu);
        records.push_back(std::move(*rec));
      } catch (const Error& e) {
        std::lock_guard lock(out_mu);
        rejects.push_back(slot.path.string() + " [" + spec.describe() + "]: " + e.what());
      } catch (...) {
        std::lock_guard lock(out_mu);
        if (!fatal) fatal = std::current_exception();
        next = total_tasks;
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  partial_out.close();
  if (fatal) std::rethrow_exception(fatal);

  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.sample_id < b.sample_id; });
  result.manifest.records = std::move(records);
  result.computed = computed;
  result.reused = reused;
  std::sort(rejects.begin(), rejects.end());
  result.rejects = std::move(rejects);

  write_manifest(manifest_path, result.manifest);
  if (!result.rejects.empty()) {
    std::string text;
    for (const auto& r : result.rejects) text += r + "\n";
    atomic_write(out_dir / "rejects.txt", text);
  }
  std::error_code ec;
  fs::remove(partial_path, ec);
  spdlog::info("gen-dataset: {} records ({} computed, {} reused), {} rejects", result.manifest.records.size(),
               result.computed, result.reused, result.rejects.size());
  return result;
}

}  // namespace pricce
