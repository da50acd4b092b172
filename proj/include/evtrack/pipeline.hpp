#pragma once

// End-to-end drivers: events -> frames -> proposals -> EOT, and events -> C-EOT.

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "evtrack/ceot.hpp"
#include "evtrack/eot.hpp"
#include "evtrack/framer.hpp"

namespace evtrack {

struct FrameResult {
  const FrameWindow& window;
  const BinaryFrame& filtered;
  std::span<const RegionProposal> proposals;
  std::span<const TrackSnapshot> snapshots;
  const EotTracker& tracker;
};

struct EotRunOptions {
  // Frames are emitted at least up to this time (e.g. the scene duration).
  std::uint64_t min_end_us = 0;
  std::function<void(const FrameResult&)> on_frame;
  std::ostream* log = nullptr;
};

std::vector<TrackSnapshot> run_eot(const EventStream& stream, const FramerConfig& framer,
                                   const EotConfig& eot, const EotRunOptions& options = {});

struct CeotRunOptions {
  std::uint64_t min_end_us = 0;
  std::function<void(const CeotTracker&, std::uint64_t tick)> on_tick;
  std::ostream* log = nullptr;
};

std::vector<TrackSnapshot> run_ceot(const EventStream& stream, const CeotConfig& cfg,
                                    const CeotRunOptions& options = {});

/// Bracket for theta_active: `lo` is the smallest value at which a static
/// 30x30 px object emitting 1000 ev/s activates a tracker, `hi` the largest at
/// which 100 ev/s of uniform noise activates none. `theta` is their geometric
/// mean. Throws Error(invalid_config) when lo >= hi.
struct ThetaCalibration {
  double lo = 0.0;
  double hi = 0.0;
  double theta = 0.0;
};

ThetaCalibration calibrate_theta_active(const CeotConfig& base, SensorGeometry geometry);

}  // namespace evtrack
