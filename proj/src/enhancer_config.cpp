#include <charconv>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "pricce/enhance.hpp"
#include "pricce/error.hpp"

namespace pricce {

namespace {

using FieldRef = std::variant<double*, int*, std::vector<double>*>;

struct Field {
  const char* section;
  const char* name;
  FieldRef ref;
};

std::vector<Field> fields(EnhancerConfig& c) {
  return {
      {"simplest_cb", "low_fraction", &c.simplest_cb.low_fraction},
      {"simplest_cb", "high_fraction", &c.simplest_cb.high_fraction},
      {"msrcr", "sigmas", &c.msrcr.sigmas},
      {"msrcr", "weights", &c.msrcr.weights},
      {"msrcr", "alpha", &c.msrcr.alpha},
      {"msrcr", "beta", &c.msrcr.beta},
      {"msrcr", "tail_fraction", &c.msrcr.tail_fraction},
      {"dhe", "smooth_width", &c.dhe.smooth_width},
      {"bpdhe", "smooth_sigma", &c.bpdhe.smooth_sigma},
      {"bpdhe", "smooth_radius", &c.bpdhe.smooth_radius},
      {"ying", "a", &c.ying.a},
      {"ying", "b", &c.ying.b},
      {"ying", "mu", &c.ying.mu},
      {"ying", "k_min", &c.ying.k_min},
      {"ying", "k_max", &c.ying.k_max},
      {"ying", "k_step", &c.ying.k_step},
      {"ying", "dark_threshold", &c.ying.dark_threshold},
      {"ying", "illumination_sigma", &c.ying.illumination_sigma},
      {"ying", "illumination_radius", &c.ying.illumination_radius},
      {"cao", "bright_threshold", &c.cao.bright_threshold},
      {"cao", "exponent", &c.cao.exponent},
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ParameterError("config key '" + key + "': bad number '" + s + "'");
  return v;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

EnhancerConfig parse_enhancer_config(std::string_view text, EnhancerConfig base) {
  EnhancerConfig cfg = std::move(base);
  auto table = fields(cfg);
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    Field* field = nullptr;
    for (auto& f : table) {
      if (key == std::string(f.section) + "." + f.name) field = &f;
    }
    if (!field) throw ParameterError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, double>) {
            *target = parse_double(value, key);
          } else if constexpr (std::is_same_v<T, int>) {
            const double d = parse_double(value, key);
            if (d != static_cast<int>(d)) throw ParameterError("config key '" + key + "' must be an integer");
            *target = static_cast<int>(d);
          } else {
            target->clear();
            std::stringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) target->push_back(parse_double(trim(item), key));
          }
        },
        field->ref);
  }
  cfg.validate();
  return cfg;
}

std::string to_config_text(const EnhancerConfig& cfg_in) {
  EnhancerConfig cfg = cfg_in;
  std::string out;
  for (const auto& f : fields(cfg)) {
    out += std::string(f.section) + "." + f.name + " = ";
    std::visit(
        [&](auto* v) {
          using T = std::remove_pointer_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::vector<double>>) {
            for (std::size_t i = 0; i < v->size(); ++i) out += (i ? ", " : "") + format_double((*v)[i]);
          } else if constexpr (std::is_same_v<T, int>) {
            out += std::to_string(*v);
          } else {
            out += format_double(*v);
          }
        },
        f.ref);
    out += "\n";
  }
  return out;
}

std::string to_json_string(const EnhancerConfig& cfg_in) {
  EnhancerConfig cfg = cfg_in;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& f : fields(cfg)) {
    std::visit([&](auto* v) { j[f.section][f.name] = *v; }, f.ref);
  }
  return j.dump();
}

EnhancerConfig enhancer_config_from_json_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("enhancer config JSON: ") + e.what());
  }
  EnhancerConfig cfg;
  for (auto& f : fields(cfg)) {
    if (!j.contains(f.section) || !j[f.section].contains(f.name)) continue;
    const auto& v = j[f.section][f.name];
    try {
      std::visit([&](auto* target) { v.get_to(*target); }, f.ref);
    } catch (const nlohmann::json::exception&) {
      throw ParameterError(std::string("enhancer config JSON: bad value for ") + f.section + "." + f.name);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace pricce
