#include "evtrack/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <vector>

#include "evtrack/error.hpp"
#include "evtrack/text.hpp"

namespace evtrack {
namespace {

using nlohmann::json;

// One visit function per section lists its keys once for both directions.
template <typename V>
void visit(FramerConfig& c, V&& v) {
  v("frame_period_us", c.frame_period_us);
  v("median_kernel", c.median_kernel);
  v("hist_threshold", c.hist_threshold);
  v("min_box_side", c.min_box_side);
  v("min_density", c.min_density);
}

template <typename V>
void visit(EotConfig& c, V&& v) {
  v("max_trackers", c.max_trackers);
  v("overlap_ratio_threshold", c.overlap_ratio_threshold);
  v("alpha", c.alpha);
  v("max_unlocks", c.max_unlocks);
  v("velocity_position_only", c.velocity_position_only);
}

template <typename V>
void visit(CeotConfig& c, V&& v) {
  v("pool_size", c.pool_size);
  v("alpha", c.alpha);
  v("alpha_t", c.alpha_t);
  v("theta_active", c.theta_active);
  v("cleanup_period_us", c.cleanup_period_us);
  v("v_alpha", c.v_alpha);
  v("v_beta", c.v_beta);
  v("p_threshold", c.p_threshold);
  v("occlusion_timestep_us", c.occlusion_timestep_us);
  v("init_half_size", c.init_half_size);
  v("init_isi_us", c.init_isi_us);
  v("size_gain", c.size_gain);
  v("size_alpha", c.size_alpha);
  v("size_window", c.size_window);
  v("min_half_size", c.min_half_size);
  v("velocity_sample_us", c.velocity_sample_us);
  v("occlusion_min_age_us", c.occlusion_min_age_us);
  v("size_adapt", c.size_adapt);
  v("occlusion_axis", c.occlusion_axis);
  v("rng_seed", c.rng_seed);
}

template <typename V>
void visit(EvalOptions& c, V&& v) {
  v("thresholds", c.thresholds);
  v("include_tracking", c.include_tracking);
  v("frame_period_us", c.frame_period_us);
}

template <typename V>
void visit(RunPaths& c, V&& v) {
  v("events", c.events);
  v("tracks", c.tracks);
  v("ground_truth", c.ground_truth);
  v("report", c.report);
}

std::string_view enum_name(SizeAdapt s) { return s == SizeAdapt::ema ? "ema" : "fixed"; }
std::string_view enum_name(OcclusionAxis a) { return a == OcclusionAxis::both ? "both" : "x_only"; }

void parse_enum(std::string_view s, SizeAdapt& out, const std::string& where) {
  if (s == "ema") {
    out = SizeAdapt::ema;
  } else if (s == "fixed") {
    out = SizeAdapt::fixed;
  } else {
    throw Error(Errc::invalid_config, where + " must be \"ema\" or \"fixed\"");
  }
}

void parse_enum(std::string_view s, OcclusionAxis& out, const std::string& where) {
  if (s == "both") {
    out = OcclusionAxis::both;
  } else if (s == "x_only") {
    out = OcclusionAxis::x_only;
  } else {
    throw Error(Errc::invalid_config, where + " must be \"both\" or \"x_only\"");
  }
}

struct Writer {
  json& j;

  template <typename T>
  void operator()(const char* key, const T& v) {
    j[key] = encode(v);
  }

  template <typename T>
  static json encode(const T& v) {
    if constexpr (std::is_enum_v<T>) {
      return std::string(enum_name(v));
    } else {
      return v;
    }
  }

  template <typename T>
  static json encode(const std::optional<T>& v) {
    return v ? encode(*v) : json(nullptr);
  }
};

struct Reader {
  const json& j;
  std::string section;

  template <typename T>
  void operator()(const char* key, T& v) {
    if (j.contains(key)) decode(j.at(key), v, section + "." + key);
  }

  template <typename T>
  static void decode(const json& x, T& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!x.is_boolean()) throw Error(Errc::invalid_config, where + " must be a boolean");
      v = x.get<bool>();
    } else if constexpr (std::is_enum_v<T>) {
      if (!x.is_string()) throw Error(Errc::invalid_config, where + " must be a string");
      parse_enum(x.get<std::string>(), v, where);
    } else if constexpr (std::is_integral_v<T>) {
      if (!x.is_number_integer()) throw Error(Errc::invalid_config, where + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (!x.is_number_unsigned()) throw Error(Errc::invalid_config, where + " must be non-negative");
      }
      v = x.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!x.is_number()) throw Error(Errc::invalid_config, where + " must be a number");
      v = x.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!x.is_string()) throw Error(Errc::invalid_config, where + " must be a string");
      v = x.get<std::string>();
    } else {
      if (!x.is_array()) throw Error(Errc::invalid_config, where + " must be an array");
      v.clear();
      for (const json& e : x) {
        typename T::value_type item{};
        decode(e, item, where + "[]");
        v.push_back(item);
      }
    }
  }

  template <typename T>
  static void decode(const json& x, std::optional<T>& v, const std::string& where) {
    if (x.is_null()) {
      v.reset();
      return;
    }
    T item{};
    decode(x, item, where);
    v = item;
  }
};

template <typename S>
json section_to_json(const S& s) {
  json j = json::object();
  S copy = s;
  visit(copy, Writer{j});
  return j;
}

template <typename S>
void section_from_json(const json& j, S& s, const std::string& name) {
  if (!j.is_object()) throw Error(Errc::invalid_config, name + " must be a JSON object");
  std::vector<std::string> keys;
  visit(s, [&keys](const char* key, auto&) { keys.emplace_back(key); });
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(Errc::invalid_config, "unknown key \"" + key + "\" in " + name);
    }
  }
  visit(s, Reader{j, name});
}

}  // namespace

void RunConfig::validate() const {
  if (sensor && (sensor->width == 0 || sensor->height == 0 || sensor->width > 65535 || sensor->height > 65535)) {
    throw Error(Errc::invalid_config, "sensor dimensions must be in [1, 65535]");
  }
  framer.validate();
  eot.validate();
  ceot.validate();
  EvalOptions e = eval;
  if (e.thresholds.empty()) throw Error(Errc::invalid_config, "eval.thresholds is empty");
  for (std::size_t i = 0; i < e.thresholds.size(); ++i) {
    if (!(e.thresholds[i] > 0.0 && e.thresholds[i] < 1.0) || (i > 0 && !(e.thresholds[i] > e.thresholds[i - 1]))) {
      throw Error(Errc::invalid_config, "eval.thresholds must be strictly increasing in (0, 1)");
    }
  }
  if (e.frame_period_us && *e.frame_period_us == 0) {
    throw Error(Errc::invalid_config, "eval.frame_period_us must be > 0");
  }
}

json to_json(const RunConfig& cfg) {
  json j = json::object();
  j["sensor"] = cfg.sensor ? json{{"width", cfg.sensor->width}, {"height", cfg.sensor->height}} : json(nullptr);
  j["framer"] = section_to_json(cfg.framer);
  j["eot"] = section_to_json(cfg.eot);
  j["ceot"] = section_to_json(cfg.ceot);
  j["eval"] = section_to_json(cfg.eval);
  j["paths"] = section_to_json(cfg.paths);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "configuration must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "sensor") {
      if (value.is_null()) continue;
      if (!value.is_object()) throw Error(Errc::invalid_config, "sensor must be a JSON object");
      SensorGeometry g;
      for (const auto& [k, v] : value.items()) {
        if (k != "width" && k != "height") throw Error(Errc::invalid_config, "unknown key \"" + k + "\" in sensor");
      }
      if (!value.contains("width") || !value.contains("height")) {
        throw Error(Errc::invalid_config, "sensor needs width and height");
      }
      Reader::decode(value.at("width"), g.width, "sensor.width");
      Reader::decode(value.at("height"), g.height, "sensor.height");
      cfg.sensor = g;
    } else if (key == "framer") {
      section_from_json(value, cfg.framer, key);
    } else if (key == "eot") {
      section_from_json(value, cfg.eot, key);
    } else if (key == "ceot") {
      section_from_json(value, cfg.ceot, key);
    } else if (key == "eval") {
      section_from_json(value, cfg.eval, key);
    } else if (key == "paths") {
      section_from_json(value, cfg.paths, key);
    } else {
      throw Error(Errc::invalid_config, "unknown top-level key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string default_config_text() { return to_json(RunConfig{}).dump(2) + "\n"; }

}  // namespace evtrack
