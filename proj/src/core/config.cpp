#include "core/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "core/io.hpp"

namespace memcap {

namespace {

using nlohmann::json;

double parse_double(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  while (end && *end == ' ') ++end;
  if (end == s || (end && *end != '\0'))
    throw Error(ErrorCode::Config,
                "value '" + value + "' for key '" + key + "' is not a number");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  if (v != std::floor(v))
    throw Error(ErrorCode::Config,
                "value '" + value + "' for key '" + key + "' is not an integer");
  return static_cast<long>(v);
}

std::vector<PiecewiseSegment> parse_segments(const std::string& key,
                                             const std::string& value) {
  // "duration:V,duration:V,..."
  std::vector<PiecewiseSegment> segs;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::Config, "segment '" + item + "' for key '" + key +
                                         "' is not duration:V");
    segs.push_back({parse_double(key, item.substr(0, colon)),
                    parse_double(key, item.substr(colon + 1))});
  }
  if (segs.empty())
    throw Error(ErrorCode::Config, "key '" + key + "' needs segments");
  return segs;
}

std::string format_segments(const std::vector<PiecewiseSegment>& segs) {
  std::string out;
  for (const PiecewiseSegment& s : segs) {
    if (!out.empty()) out += ',';
    out += format_double(s.duration) + ":" + format_double(s.V);
  }
  return out;
}

struct KeyDef {
  std::string key;
  std::function<void(FullConfig&, const std::string&)> set;
  std::function<std::string(const FullConfig&)> get;
};

std::vector<KeyDef> build_schema() {
  std::vector<KeyDef> defs;
  auto add_double = [&](const std::string& key, auto accessor) {
    defs.push_back(
        {key,
         [key, accessor](FullConfig& c, const std::string& v) {
           accessor(c) = parse_double(key, v);
         },
         [accessor](const FullConfig& c) {
           return format_double(accessor(const_cast<FullConfig&>(c)));
         }});
  };
  auto add_long = [&](const std::string& key, auto accessor) {
    defs.push_back(
        {key,
         [key, accessor](FullConfig& c, const std::string& v) {
           accessor(c) = parse_long(key, v);
         },
         [accessor](const FullConfig& c) {
           return std::to_string(accessor(const_cast<FullConfig&>(c)));
         }});
  };

  add_double("model.d", [](FullConfig& c) -> double& { return c.model.d; });
  add_double("model.x_c", [](FullConfig& c) -> double& { return c.model.x_c; });
  add_double("model.beta", [](FullConfig& c) -> double& { return c.model.beta; });
  add_double("model.k", [](FullConfig& c) -> double& { return c.model.k; });
  add_double("model.rho0", [](FullConfig& c) -> double& { return c.model.rho0; });
  add_double("model.gamma_damp",
             [](FullConfig& c) -> double& { return c.model.gamma_damp; });
  add_double("model.x_guard",
             [](FullConfig& c) -> double& { return c.model.x_guard; });
  defs.push_back(
      {"model.memristance",
       [](FullConfig& c, const std::string& v) {
         if (v == "type1") {
           c.model.memristance = TypeI{};
         } else if (v == "type2") {
           c.model.memristance = TypeII{c.beta2};
         } else {
           throw Error(ErrorCode::Config,
                       "model.memristance must be type1 or type2, got '" + v +
                           "'");
         }
       },
       [](const FullConfig& c) {
         return std::string(c.model.is_type2() ? "type2" : "type1");
       }});
  defs.push_back({"model.beta2",
                  [](FullConfig& c, const std::string& v) {
                    c.beta2 = parse_double("model.beta2", v);
                    if (c.model.is_type2())
                      c.model.memristance = TypeII{c.beta2};
                  },
                  [](const FullConfig& c) { return format_double(c.beta2); }});

  add_double("circuit.r", [](FullConfig& c) -> double& { return c.r; });

  defs.push_back({"series.kind",
                  [](FullConfig& c, const std::string& v) {
                    if (v != "fixed" && v != "kernel" && v != "threshold")
                      throw Error(ErrorCode::Config,
                                  "series.kind must be fixed, kernel or "
                                  "threshold, got '" +
                                      v + "'");
                    c.series_kind = v;
                  },
                  [](const FullConfig& c) { return c.series_kind; }});
  add_double("series.alpha1",
             [](FullConfig& c) -> double& { return c.kernel.alpha1; });
  add_double("series.lambda1",
             [](FullConfig& c) -> double& { return c.kernel.lambda1; });
  add_double("series.gamma_kernel",
             [](FullConfig& c) -> double& { return c.kernel.gamma_kernel; });
  add_double("series.r0", [](FullConfig& c) -> double& { return c.kernel.r0; });
  add_double("series.alpha2",
             [](FullConfig& c) -> double& { return c.threshold.alpha2; });
  add_double("series.lambda2",
             [](FullConfig& c) -> double& { return c.threshold.lambda2; });
  add_double("series.i_thresh",
             [](FullConfig& c) -> double& { return c.threshold.i_thresh; });
  add_double("series.lambda_prime",
             [](FullConfig& c) -> double& { return c.threshold.lambda_prime; });
  defs.push_back({"series.r_min",
                  [](FullConfig& c, const std::string& v) {
                    double val = parse_double("series.r_min", v);
                    c.kernel.r_min = val;
                    c.threshold.r_min = val;
                  },
                  [](const FullConfig& c) {
                    return format_double(c.series_kind == "threshold"
                                             ? c.threshold.r_min
                                             : c.kernel.r_min);
                  }});
  defs.push_back({"series.init_r",
                  [](FullConfig& c, const std::string& v) {
                    double val = parse_double("series.init_r", v);
                    c.kernel.init_r = val;
                    c.threshold.init_r = val;
                  },
                  [](const FullConfig& c) {
                    return format_double(c.series_kind == "threshold"
                                             ? c.threshold.init_r
                                             : c.kernel.init_r);
                  }});

  defs.push_back({"drive.kind",
                  [](FullConfig& c, const std::string& v) {
                    if (v != "dc" && v != "dc_ac" && v != "piecewise")
                      throw Error(ErrorCode::Config,
                                  "drive.kind must be dc, dc_ac or piecewise, "
                                  "got '" +
                                      v + "'");
                    c.drive_kind = v;
                  },
                  [](const FullConfig& c) { return c.drive_kind; }});
  add_double("drive.V", [](FullConfig& c) -> double& { return c.drive_v; });
  add_double("drive.V_dc",
             [](FullConfig& c) -> double& { return c.drive_ac.V_dc; });
  add_double("drive.delta_V",
             [](FullConfig& c) -> double& { return c.drive_ac.delta_V; });
  add_double("drive.omega_source",
             [](FullConfig& c) -> double& { return c.drive_ac.omega_source; });
  defs.push_back({"drive.segments",
                  [](FullConfig& c, const std::string& v) {
                    c.drive_segments = parse_segments("drive.segments", v);
                  },
                  [](const FullConfig& c) {
                    return format_segments(c.drive_segments);
                  }});

  add_double("integrator.rtol",
             [](FullConfig& c) -> double& { return c.integrator.rtol; });
  add_double("integrator.atol",
             [](FullConfig& c) -> double& { return c.integrator.atol; });
  add_double("integrator.h_init",
             [](FullConfig& c) -> double& { return c.integrator.h_init; });
  add_double("integrator.h_max",
             [](FullConfig& c) -> double& { return c.integrator.h_max; });
  add_long("integrator.max_steps",
           [](FullConfig& c) -> long& { return c.integrator.max_steps; });

  add_double("sim.T", [](FullConfig& c) -> double& { return c.sim.T; });
  add_double("sim.x0", [](FullConfig& c) -> double& { return c.sim.x0; });
  add_double("sim.q0", [](FullConfig& c) -> double& { return c.sim.q0; });
  add_double("sim.dt_out",
             [](FullConfig& c) -> double& { return c.sim.dt_out; });
  return defs;
}

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> defs = build_schema();
  return defs;
}

std::string valid_keys_message() {
  std::string msg = "valid keys:";
  for (const KeyDef& d : schema()) msg += " " + d.key;
  return msg;
}

const KeyDef& find_key(const std::string& key) {
  for (const KeyDef& d : schema())
    if (d.key == key) return d;
  throw Error(ErrorCode::Config,
              "unknown configuration key '" + key + "'; " + valid_keys_message());
}

void flatten_json(const json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_json(it.value(), key, out);
    }
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_number() || j.is_boolean()) {
    out.emplace_back(prefix, j.dump());
  } else {
    throw Error(ErrorCode::Config,
                "unsupported JSON value for key '" + prefix + "'");
  }
}

}  // namespace

SeriesElement FullConfig::series() const {
  if (series_kind == "kernel") return SeriesElement(kernel);
  if (series_kind == "threshold") return SeriesElement(threshold);
  return SeriesElement(FixedResistor{r});
}

Drive FullConfig::drive() const {
  if (drive_kind == "dc_ac") return Drive(drive_ac);
  if (drive_kind == "piecewise") return Drive::piecewise(drive_segments);
  return Drive::dc(drive_v);
}

void FullConfig::validate() const {
  model.validate();
  if (!(r > 0.0)) throw Error(ErrorCode::Validation, "requires circuit.r > 0");
  series().validate();
  drive().validate();
  integrator.validate();
  if (!(sim.T > 0.0)) throw Error(ErrorCode::Validation, "requires sim.T > 0");
  if (!(sim.dt_out > 0.0))
    throw Error(ErrorCode::Validation, "requires sim.dt_out > 0");
}

FullConfig default_config() { return FullConfig{}; }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const KeyDef& d : schema()) out.push_back(d.key);
    return out;
  }();
  return keys;
}

void apply_override(FullConfig& cfg, const std::string& key,
                    const std::string& value) {
  find_key(key).set(cfg, value);
}

std::string get_value(const FullConfig& cfg, const std::string& key) {
  return find_key(key).get(cfg);
}

void apply_config_text(FullConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t\r");
      std::size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string stripped = trim(line);
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) +
                                         ": expected key = value, got '" +
                                         stripped + "'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

FullConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  FullConfig cfg = default_config();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    json j;
    try {
      j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Config, std::string("JSON parse error: ") + e.what());
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    flatten_json(j, "", pairs);
    for (const auto& [key, value] : pairs) apply_override(cfg, key, value);
  } else {
    apply_config_text(cfg, buf.str());
  }
  return cfg;
}

}  // namespace memcap
