#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evtrack {

/// Sensor resolution in pixels.
struct SensorGeometry {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// One asynchronous sensor event. `t` is in microseconds relative to the
/// start of the stream.
struct Event {
  std::uint64_t t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t p = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// A validated, time-ordered event sequence bound to a sensor geometry.
/// Immutable after construction.
class EventStream {
 public:
  EventStream() = default;

  // Throws evtrack::Error (out_of_bounds_event, non_monotone_timestamp,
  // malformed_record) when an event violates the stream invariants.
  EventStream(SensorGeometry geometry, std::vector<Event> events);

  const SensorGeometry& geometry() const { return geometry_; }
  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  SensorGeometry geometry_{1, 1};
  std::vector<Event> events_;
};

/// Axis-aligned rectangle: top-left corner plus extent, in pixels.
struct BoxF {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  friend bool operator==(const BoxF&, const BoxF&) = default;
};

// max(0, overlap in x) * max(0, overlap in y)
double overlap_area(const BoxF& a, const BoxF& b);

BoxF union_box(const BoxF& a, const BoxF& b);

BoxF shifted(const BoxF& b, double dx, double dy);

enum class TrackState : std::uint8_t { free, tracking, locked };

std::string_view to_string(TrackState s);

/// One row of tracker output.
struct TrackSnapshot {
  std::int64_t id = 0;
  std::uint64_t t = 0;
  BoxF box;
  TrackState state = TrackState::tracking;
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const TrackSnapshot&, const TrackSnapshot&) = default;
};

/// One annotated ground-truth box of one object.
struct GroundTruthRecord {
  std::int64_t object_id = 0;
  std::uint64_t t = 0;
  BoxF box;
  std::string class_label;

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

}  // namespace evtrack
