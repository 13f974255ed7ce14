#include "pricce/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"

namespace pricce {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string basename_key(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  return lower(slash == std::string::npos ? path : path.substr(slash + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  if (line.find(',') != std::string::npos) return split_csv(line);
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size() && std::isfinite(v);
  } catch (const std::exception&) {
    return false;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

BenchmarkDataset parse_dataset(std::string_view name) {
  const std::string n = lower(std::string(name));
  if (n == "tid2013") return BenchmarkDataset::TID2013;
  if (n == "csiq") return BenchmarkDataset::CSIQ;
  if (n == "ccid2014") return BenchmarkDataset::CCID2014;
  throw ParameterError("unknown dataset '" + std::string(name) + "' (expected tid2013, csiq or ccid2014)");
}

std::string_view dataset_name(BenchmarkDataset d) noexcept {
  switch (d) {
    case BenchmarkDataset::TID2013: return "tid2013";
    case BenchmarkDataset::CSIQ: return "csiq";
    case BenchmarkDataset::CCID2014: return "ccid2014";
  }
  return "unknown";
}

SubjectiveTable load_tid2013(std::string_view text) {
  SubjectiveTable t{{}, Polarity::MOS};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    double mos = 0.0;
    if (f.size() != 2 || !parse_number(f[0], mos)) {
      throw ParameterError("tid2013 line " + std::to_string(line_no) + ": expected '<mos> <file>'");
    }
    // i01_16_3.bmp -> distortion type 16
    const std::string name = lower(f[1]);
    const auto u1 = name.find('_');
    const auto u2 = u1 == std::string::npos ? u1 : name.find('_', u1 + 1);
    if (u2 == std::string::npos) {
      throw ParameterError("tid2013 line " + std::to_string(line_no) + ": unexpected file name '" + f[1] + "'");
    }
    const std::string type = name.substr(u1 + 1, u2 - u1 - 1);
    if (type == "16" || type == "17") t.entries.push_back({name, mos});
  }
  return t;
}

SubjectiveTable load_csiq(std::string_view text) {
  SubjectiveTable t{{}, Polarity::DMOS};
  std::istringstream in{std::string(text)};
  std::string line;
  std::map<std::string, std::size_t> col;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < f.size(); ++i) col[lower(f[i])] = i;
      for (const char* need : {"image", "dst_type", "dst_lev", "dmos"}) {
        if (!col.count(need)) throw ParameterError(std::string("csiq: header lacks column '") + need + "'");
      }
      continue;
    }
    auto get = [&](const char* key) -> std::string {
      const std::size_t i = col.at(key);
      if (i >= f.size()) throw ParameterError("csiq line " + std::to_string(line_no) + ": too few columns");
      return f[i];
    };
    if (lower(get("dst_type")) != "contrast") continue;
    double dmos = 0.0;
    if (!parse_number(get("dmos"), dmos)) {
      throw ParameterError("csiq line " + std::to_string(line_no) + ": bad dmos '" + get("dmos") + "'");
    }
    std::string name;
    if (col.count("file") && col.at("file") < f.size() && !f[col.at("file")].empty()) {
      name = f[col.at("file")];
    } else {
      name = get("image") + ".contrast." + get("dst_lev") + ".png";
    }
    t.entries.push_back({basename_key(name), dmos});
  }
  if (col.empty()) throw ParameterError("csiq: file is empty");
  return t;
}

SubjectiveTable load_ccid2014(std::string_view text) {
  SubjectiveTable t{{}, Polarity::MOS};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != 2) throw ParameterError("ccid2014 line " + std::to_string(line_no) + ": expected two columns");
    double v = 0.0;
    if (parse_number(f[1], v)) {
      t.entries.push_back({basename_key(f[0]), v});
    } else if (parse_number(f[0], v)) {
      t.entries.push_back({basename_key(f[1]), v});
    } else if (line_no == 1) {
      continue;  // header
    } else {
      throw ParameterError("ccid2014 line " + std::to_string(line_no) + ": no numeric MOS column");
    }
  }
  return t;
}

SubjectiveTable load_subjective(BenchmarkDataset d, const std::filesystem::path& path) {
  const std::string text = read_file_text(path);
  try {
    switch (d) {
      case BenchmarkDataset::TID2013: return load_tid2013(text);
      case BenchmarkDataset::CSIQ: return load_csiq(text);
      case BenchmarkDataset::CCID2014: return load_ccid2014(text);
    }
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
  throw ParameterError("unknown dataset");
}

std::vector<ObjectiveEntry> parse_score_csv(std::string_view text) {
  std::vector<ObjectiveEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (!header) {
      if (f.size() < 4 || lower(f[0]) != "path" || lower(f[1]) != "score") {
        throw ParameterError("scores CSV must start with the header 'path,score,enhancer,fr'");
      }
      header = true;
      continue;
    }
    double v = 0.0;
    if (f.size() < 4 || !parse_number(f[1], v)) {
      throw ParameterError("scores CSV line " + std::to_string(line_no) + ": expected path,score,enhancer,fr");
    }
    out.push_back({f[0], v, f[2], lower(f[3])});
  }
  if (!header) throw ParameterError("scores CSV is empty");
  return out;
}

BenchmarkResult evaluate_scores(const SubjectiveTable& subjective, const std::vector<ObjectiveEntry>& objective,
                                std::string name) {
  if (objective.empty()) throw ParameterError("no objective scores to evaluate");
  const std::string fr = objective.front().fr;
  for (const auto& o : objective) {
    if (o.fr != fr) throw ParameterError("scores mix FR metrics '" + fr + "' and '" + o.fr + "'");
  }
  std::map<std::string, double> subj;
  for (const auto& e : subjective.entries) {
    if (!subj.emplace(lower(e.name), e.value).second) throw ParameterError("subjective scores list '" + e.name + "' twice");
  }

  const bool negate_obj = fr == "gmsd";
  const bool negate_subj = subjective.polarity == Polarity::DMOS;
  BenchmarkResult res;
  ScorePairs pairs;
  std::vector<std::string> misses;
  std::size_t miss_count = 0;
  for (const auto& o : objective) {
    const std::string key = basename_key(o.path);
    auto it = subj.find(key);
    if (it == subj.end()) {
      if (misses.size() < 10) misses.push_back(o.path);
      ++miss_count;
      continue;
    }
    pairs.objective.push_back(negate_obj ? -o.score : o.score);
    pairs.subjective.push_back(negate_subj ? -it->second : it->second);
    res.scatter.push_back({key, pairs.objective.back(), 0.0, pairs.subjective.back()});
  }
  if (miss_count > 0) {
    std::string list;
    for (const auto& m : misses) list += "\n  " + m;
    throw ParameterError(std::to_string(miss_count) + " scored image(s) have no subjective score; first misses:" + list);
  }

  EvalReport& r = res.report;
  r.dataset_name = std::move(name);
  r.fr_metric = fr;
  r.n = pairs.n();
  r.subjective_scale = negate_subj ? "DMOS (negated)" : "MOS";
  r.objective_negated = negate_obj;
  pairs.validate();
  r.srocc = srocc(pairs);
  r.krocc = krocc(pairs);
  if (pairs.n() >= 5) r.fit = fit_logistic(pairs);
  if (r.fit.converged) {
    std::tie(r.plcc, r.rmse) = plcc_rmse(pairs, r.fit);
    for (auto& row : res.scatter) row.fitted = logistic5(r.fit.beta, row.objective);
  } else {
    spdlog::warn("logistic fit did not converge; PLCC/RMSE use raw scores");
    r.raw_plcc = true;
    r.plcc = pearson(pairs.objective, pairs.subjective);
    double sq = 0.0;
    for (std::size_t i = 0; i < pairs.n(); ++i) sq += std::pow(pairs.objective[i] - pairs.subjective[i], 2);
    r.rmse = std::sqrt(sq / static_cast<double>(pairs.n()));
    for (auto& row : res.scatter) row.fitted = row.objective;
  }
  return res;
}

BenchmarkResult run_benchmark(BenchmarkDataset d, const std::filesystem::path& mos_file,
                              const std::filesystem::path& scores_csv) {
  const SubjectiveTable subj = load_subjective(d, mos_file);
  std::vector<ObjectiveEntry> obj;
  try {
    obj = parse_score_csv(read_file_text(scores_csv));
  } catch (const ParameterError& e) {
    throw ParameterError(scores_csv.string() + ": " + e.what());
  }
  return evaluate_scores(subj, obj, std::string(dataset_name(d)));
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["dataset_name"] = r.dataset_name;
  j["fr_metric"] = r.fr_metric;
  j["n"] = r.n;
  j["srocc"] = r.srocc;
  j["krocc"] = r.krocc;
  j["plcc"] = r.plcc;
  j["rmse"] = r.rmse;
  j["fit"] = {{"beta", r.fit.beta}, {"converged", r.fit.converged}, {"iterations", r.fit.iterations}};
  j["subjective_scale"] = r.subjective_scale;
  j["objective_negated"] = r.objective_negated;
  j["raw_plcc"] = r.raw_plcc;
  return j.dump(2) + "\n";
}

std::string scatter_to_csv(const std::vector<ScatterRow>& rows) {
  std::string out = "name,objective,fitted,subjective\n";
  for (const auto& r : rows) {
    out += csv_field(r.name) + "," + fmt_double(r.objective) + "," + fmt_double(r.fitted) + "," +
           fmt_double(r.subjective) + "\n";
  }
  return out;
}

std::string scatter_to_svg(const std::vector<ScatterRow>& rows, const EvalReport& r) {
  constexpr double W = 480, H = 360, M = 40;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& row : rows) {
    x0 = std::min(x0, row.objective);
    x1 = std::max(x1, row.objective);
    y0 = std::min({y0, row.subjective, row.fitted});
    y1 = std::max({y1, row.subjective, row.fitted});
  }
  if (rows.empty()) x0 = y0 = 0, x1 = y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& row : rows) {
    os << "<circle cx=\"" << px(row.objective) << "\" cy=\"" << py(row.subjective)
       << "\" r=\"2\" fill=\"steelblue\"/>\n";
  }
  std::vector<ScatterRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.objective < b.objective; });
  if (!sorted.empty()) {
    os << "<polyline fill=\"none\" stroke=\"crimson\" points=\"";
    for (const auto& row : sorted) os << px(row.objective) << "," << py(row.fitted) << " ";
    os << "\"/>\n";
  }
  os << "<text x=\"" << M << "\" y=\"" << M - 10 << "\" font-size=\"12\">" << r.dataset_name << " / " << r.fr_metric
     << ": SROCC " << fmt_double(r.srocc) << ", PLCC " << fmt_double(r.plcc) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace pricce
