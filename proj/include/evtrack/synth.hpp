#pragma once

// Deterministic synthetic event scenes with analytic ground truth.
//
// Each object is a rectangle translating at constant velocity. It emits events
// as a Poisson process at uniformly random points of its 1-px perimeter band,
// which is what a moving edge looks like to a static event sensor. Uniform
// background noise is a second Poisson process over the whole sensor.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "evtrack/types.hpp"

namespace evtrack {

struct SceneObject {
  BoxF box0;                  // box at appear_t
  double vx = 0.0;            // px/s
  double vy = 0.0;
  double edge_event_rate = 0.0;  // ev/s
  std::uint64_t appear_t = 0;
  std::optional<std::uint64_t> disappear_t;  // defaults to the scene duration
};

struct SceneSpec {
  std::string name;
  SensorGeometry geometry{240, 180};
  std::uint64_t duration_us = 0;
  std::vector<SceneObject> objects;
  double noise_rate = 0.0;  // ev/s over the full sensor
  std::uint64_t rng_seed = 7;

  // Throws Error(invalid_spec).
  void validate() const;
};

struct Scene {
  EventStream stream;
  std::vector<GroundTruthRecord> ground_truth;  // 1 ms cadence, grouped by object
};

inline constexpr std::uint64_t kGroundTruthCadenceUs = 1000;

/// Unclipped analytic box: box0 + velocity * (t - appear_t).
BoxF object_box_at(const SceneObject& obj, std::uint64_t t);

/// Box clipped to the sensor; empty optional when nothing is visible.
std::optional<BoxF> clip_to_geometry(const BoxF& box, SensorGeometry geometry);

Scene generate(const SceneSpec& spec);

/// Canonical scenes S1..S6 used by the acceptance suite.
std::vector<SceneSpec> standard_suite();
SceneSpec standard_scene(std::string_view name);

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);

/// Portable random source: mt19937_64 with explicit conversions, so seeded
/// sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double exponential(double rate);      // mean 1/rate

 private:
  std::mt19937_64 engine_;
};

}  // namespace evtrack
