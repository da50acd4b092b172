#include "evtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evtrack/error.hpp"

namespace evtrack {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

void SceneSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(Errc::invalid_spec, (name.empty() ? std::string("scene") : name) + ": " + what);
  };
  if (geometry.width < 1 || geometry.height < 1 || geometry.width > 65535 || geometry.height > 65535) {
    fail("geometry must be within 1..65535");
  }
  if (!(noise_rate >= 0.0) || !std::isfinite(noise_rate)) fail("noise_rate must be finite and >= 0");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& o = objects[i];
    const std::string tag = "object " + std::to_string(i) + ": ";
    if (!(o.box0.w >= 1.0 && o.box0.h >= 1.0)) fail(tag + "box extent must be >= 1 px");
    if (!std::isfinite(o.box0.x) || !std::isfinite(o.box0.y) || !std::isfinite(o.vx) || !std::isfinite(o.vy)) {
      fail(tag + "non-finite box or velocity");
    }
    if (!(o.edge_event_rate >= 0.0) || !std::isfinite(o.edge_event_rate)) fail(tag + "rate must be >= 0");
    if (o.disappear_t && *o.disappear_t <= o.appear_t) fail(tag + "disappear_t must follow appear_t");
  }
}

BoxF object_box_at(const SceneObject& obj, std::uint64_t t) {
  const double dt = (static_cast<double>(t) - static_cast<double>(obj.appear_t)) * 1e-6;
  return shifted(obj.box0, obj.vx * dt, obj.vy * dt);
}

std::optional<BoxF> clip_to_geometry(const BoxF& box, SensorGeometry geometry) {
  const double x0 = std::max(0.0, box.x);
  const double y0 = std::max(0.0, box.y);
  const double x1 = std::min(static_cast<double>(geometry.width), box.right());
  const double y1 = std::min(static_cast<double>(geometry.height), box.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  // Unclipped extents are kept as given; right - left would round.
  const double w = x0 == box.x && x1 == box.right() ? box.w : x1 - x0;
  const double h = y0 == box.y && y1 == box.bottom() ? box.h : y1 - y0;
  return BoxF{x0, y0, w, h};
}

namespace {

// Point on the inner 1-px border of `box`, parametrised by u in [0, 1).
std::pair<double, double> perimeter_point(const BoxF& box, double u) {
  const double iw = box.w - 1.0;
  const double ih = box.h - 1.0;
  const double perimeter = 2.0 * (iw + ih);
  if (perimeter <= 0.0) return {box.x, box.y};
  double s = u * perimeter;
  if (s < iw) return {box.x + s, box.y};
  s -= iw;
  if (s < ih) return {box.x + iw, box.y + s};
  s -= ih;
  if (s < iw) return {box.x + iw - s, box.y + ih};
  s -= iw;
  return {box.x, box.y + ih - s};
}

std::uint64_t end_time(const SceneSpec& spec, const SceneObject& o) {
  return std::min(spec.duration_us, o.disappear_t.value_or(spec.duration_us));
}

}  // namespace

Scene generate(const SceneSpec& spec) {
  spec.validate();
  const double width = spec.geometry.width;
  const double height = spec.geometry.height;

  std::vector<Event> events;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const SceneObject& o = spec.objects[i];
    if (o.edge_event_rate <= 0.0) continue;
    Rng rng(spec.rng_seed, i);
    const double t_end = static_cast<double>(end_time(spec, o));
    double t = static_cast<double>(o.appear_t);
    while (true) {
      t += rng.exponential(o.edge_event_rate) * 1e6;
      if (t >= t_end) break;
      const auto ts = static_cast<std::uint64_t>(t);
      const auto [px, py] = perimeter_point(object_box_at(o, ts), rng.uniform());
      const std::uint8_t p = rng.uniform() < 0.5 ? 0 : 1;
      const double fx = std::floor(px);
      const double fy = std::floor(py);
      if (fx < 0.0 || fy < 0.0 || fx >= width || fy >= height) continue;
      events.push_back(Event{ts, static_cast<std::uint16_t>(fx), static_cast<std::uint16_t>(fy), p});
    }
  }
  if (spec.noise_rate > 0.0) {
    Rng rng(spec.rng_seed, spec.objects.size());
    double t = 0.0;
    const auto duration = static_cast<double>(spec.duration_us);
    while (true) {
      t += rng.exponential(spec.noise_rate) * 1e6;
      if (t >= duration) break;
      const auto x = std::min(spec.geometry.width - 1, static_cast<std::uint32_t>(rng.uniform() * width));
      const auto y = std::min(spec.geometry.height - 1, static_cast<std::uint32_t>(rng.uniform() * height));
      const std::uint8_t p = rng.uniform() < 0.5 ? 0 : 1;
      events.push_back(Event{static_cast<std::uint64_t>(t), static_cast<std::uint16_t>(x),
                             static_cast<std::uint16_t>(y), p});
    }
  }
  // Ties keep object order, then noise.
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

  std::vector<GroundTruthRecord> gt;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const SceneObject& o = spec.objects[i];
    const std::uint64_t t_end = end_time(spec, o);
    std::uint64_t t = (o.appear_t + kGroundTruthCadenceUs - 1) / kGroundTruthCadenceUs * kGroundTruthCadenceUs;
    for (; t <= t_end; t += kGroundTruthCadenceUs) {
      if (auto box = clip_to_geometry(object_box_at(o, t), spec.geometry)) {
        gt.push_back(GroundTruthRecord{static_cast<std::int64_t>(i + 1), t, *box, "object"});
      }
    }
  }
  return Scene{EventStream(spec.geometry, std::move(events)), std::move(gt)};
}

std::vector<SceneSpec> standard_suite() {
  const SensorGeometry g{640, 480};
  constexpr double kRate = 20000.0;
  std::vector<SceneSpec> suite;

  // S1: one object, constant diagonal velocity, no noise.
  suite.push_back({"S1", g, 3'000'000, {{BoxF{100, 100, 30, 24}, 120.0, 60.0, kRate, 0, {}}}, 0.0, 7});

  // S2: two objects moving in opposite horizontal directions; both centres
  // reach the sensor centre (320, 240) at duration / 2.
  suite.push_back({"S2",
                   g,
                   4'000'000,
                   {{BoxF{145, 148, 30, 24}, 80.0, 40.0, kRate, 0, {}},
                    {BoxF{465, 148, 30, 24}, -80.0, 40.0, kRate, 0, {}}},
                   100.0,
                   7});

  // S3: a fast object overtakes a slow one moving the same way; centres
  // coincide at (320, 240) at duration / 2.
  suite.push_back({"S3",
                   g,
                   4'000'000,
                   {{BoxF{25, 148, 30, 24}, 140.0, 40.0, kRate, 0, {}},
                    {BoxF{205, 148, 30, 24}, 50.0, 40.0, kRate, 0, {}}},
                   100.0,
                   7});

  // S4: background noise only.
  suite.push_back({"S4", g, 3'000'000, {}, 100.0, 7});

  // S5: eight objects translating together on a 4 x 2 grid.
  SceneSpec s5{"S5", g, 2'000'000, {}, 100.0, 7};
  for (double y : {40.0, 240.0}) {
    for (double x : {20.0, 160.0, 300.0, 440.0}) {
      s5.objects.push_back({BoxF{x, y, 36, 28}, 60.0, 45.0, kRate, 0, {}});
    }
  }
  suite.push_back(s5);

  // S6: objects entering and leaving through the sensor borders.
  suite.push_back({"S6",
                   g,
                   5'000'000,
                   {{BoxF{-40, 150, 36, 28}, 150.0, 30.0, kRate, 0, {}},
                    {BoxF{500, -30, 30, 28}, 30.0, 120.0, kRate, 500'000, {}}},
                   100.0,
                   7});
  return suite;
}

SceneSpec standard_scene(std::string_view name) {
  for (auto& s : standard_suite()) {
    if (s.name == name) return s;
  }
  throw Error(Errc::invalid_spec, "unknown standard scene \"" + std::string(name) + "\"");
}

nlohmann::json to_json(const SceneSpec& spec) {
  nlohmann::json objects = nlohmann::json::array();
  for (const SceneObject& o : spec.objects) {
    nlohmann::json jo{{"box0", {{"x", o.box0.x}, {"y", o.box0.y}, {"w", o.box0.w}, {"h", o.box0.h}}},
                      {"vx", o.vx},
                      {"vy", o.vy},
                      {"edge_event_rate", o.edge_event_rate},
                      {"appear_t", o.appear_t}};
    if (o.disappear_t) jo["disappear_t"] = *o.disappear_t;
    objects.push_back(std::move(jo));
  }
  return nlohmann::json{{"name", spec.name},
                        {"geometry", {{"width", spec.geometry.width}, {"height", spec.geometry.height}}},
                        {"duration_us", spec.duration_us},
                        {"noise_rate", spec.noise_rate},
                        {"rng_seed", spec.rng_seed},
                        {"objects", objects}};
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::invalid_spec, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::invalid_spec, "unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

SceneSpec scene_from_json(const nlohmann::json& j) {
  try {
    check_keys(j, {"name", "geometry", "duration_us", "noise_rate", "rng_seed", "objects"}, "scene");
    SceneSpec spec;
    spec.name = get_or<std::string>(j, "name", "");
    const auto& g = j.at("geometry");
    check_keys(g, {"width", "height"}, "geometry");
    spec.geometry = {g.at("width").get<std::uint32_t>(), g.at("height").get<std::uint32_t>()};
    spec.duration_us = j.at("duration_us").get<std::uint64_t>();
    spec.noise_rate = get_or<double>(j, "noise_rate", 0.0);
    spec.rng_seed = get_or<std::uint64_t>(j, "rng_seed", 7);
    for (const auto& jo : j.value("objects", nlohmann::json::array())) {
      check_keys(jo, {"box0", "vx", "vy", "edge_event_rate", "appear_t", "disappear_t"}, "object");
      const auto& b = jo.at("box0");
      check_keys(b, {"x", "y", "w", "h"}, "box0");
      SceneObject o;
      o.box0 = {b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()};
      o.vx = get_or<double>(jo, "vx", 0.0);
      o.vy = get_or<double>(jo, "vy", 0.0);
      o.edge_event_rate = jo.at("edge_event_rate").get<double>();
      o.appear_t = get_or<std::uint64_t>(jo, "appear_t", 0);
      if (jo.contains("disappear_t")) o.disappear_t = jo.at("disappear_t").get<std::uint64_t>();
      spec.objects.push_back(o);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_spec, e.what());
  }
}

}  // namespace evtrack
