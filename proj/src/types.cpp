#include "evtrack/types.hpp"

#include <algorithm>
#include <string>

#include "evtrack/error.hpp"

namespace evtrack {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::malformed_header: return "MalformedHeader";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::out_of_bounds_event: return "OutOfBoundsEvent";
    case Errc::non_monotone_timestamp: return "NonMonotoneTimestamp";
    case Errc::truncated_record: return "TruncatedRecord";
    case Errc::io_failure: return "IoFailure";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_positive_dt: return "NonPositiveDt";
    case Errc::missing_pre_occlusion_size: return "MissingPreOcclusionSize";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::empty_ground_truth: return "EmptyGroundTruth";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

bool Error::is_input_error() const noexcept {
  switch (code_) {
    case Errc::non_positive_dt:
    case Errc::missing_pre_occlusion_size:
      return false;
    default:
      return true;
  }
}

EventStream::EventStream(SensorGeometry geometry, std::vector<Event> events)
    : geometry_(geometry), events_(std::move(events)) {
  if (geometry_.width < 1 || geometry_.height < 1 || geometry_.width > 65535 ||
      geometry_.height > 65535) {
    throw Error(Errc::malformed_header, "sensor geometry must be within 1..65535");
  }
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.x >= geometry_.width || e.y >= geometry_.height) {
      throw Error(Errc::out_of_bounds_event,
                  "event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                      std::to_string(e.y) + ") outside " + std::to_string(geometry_.width) + "x" +
                      std::to_string(geometry_.height));
    }
    if (e.p > 1) {
      throw Error(Errc::malformed_record, "event " + std::to_string(i) + " has polarity " +
                                              std::to_string(e.p));
    }
    if (i > 0 && e.t < prev) {
      throw Error(Errc::non_monotone_timestamp,
                  "event " + std::to_string(i) + " at t=" + std::to_string(e.t) +
                      " precedes t=" + std::to_string(prev));
    }
    prev = e.t;
  }
}

double overlap_area(const BoxF& a, const BoxF& b) {
  const double ox = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double oy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  return ox * oy;
}

BoxF union_box(const BoxF& a, const BoxF& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

BoxF shifted(const BoxF& b, double dx, double dy) { return {b.x + dx, b.y + dy, b.w, b.h}; }

std::string_view to_string(TrackState s) {
  switch (s) {
    case TrackState::free: return "free";
    case TrackState::tracking: return "tracking";
    case TrackState::locked: return "locked";
  }
  return "free";
}

}  // namespace evtrack
