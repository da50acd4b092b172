#pragma once

// Frame-based events overlap tracker.
//
// Each frame, active trackers are shifted by their velocity and compared with
// the frame's region proposals through an overlap ratio. Matched trackers are
// smoothed towards their proposal; proposals claimed by two trackers that are
// about to run into each other are split using the trackers' pre-occlusion
// sizes. Unmatched trackers coast for a few frames before being released.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "evtrack/framer.hpp"
#include "evtrack/types.hpp"

namespace evtrack {

struct EotConfig {
  int max_trackers = 8;
  double overlap_ratio_threshold = 0.2;
  double alpha = 0.5;
  int max_unlocks = 3;
  // Drops the (w_new - w_prev) term from the velocity update.
  bool velocity_position_only = false;

  void validate() const;
};

struct Extent {
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct Track {
  std::int64_t id = 0;
  BoxF box;
  double vx = 0.0;  // px/s
  double vy = 0.0;
  TrackState state = TrackState::free;
  std::uint64_t t_last = 0;
  int unlock_count = 0;
  std::optional<Extent> pre_occlusion_size;
  // Occlusion bookkeeping: partner id and the width of the shared region on
  // the previous occluded frame.
  std::optional<std::int64_t> occlusion_partner;
  double shared_width = 0.0;

  bool is_free() const { return state == TrackState::free; }
  double speed() const;
};

struct OcclusionContext {
  bool cd = false;   // common direction
  bool wi = false;   // width increase of the shared region
  bool hvo = false;  // the evaluated tracker is the faster one
};

/// overlap_area(tracker, proposal) / min(area(tracker), area(proposal)); 0 for
/// degenerate boxes.
double overlap_ratio(const BoxF& tracker, const BoxF& proposal);

/// Box shifted by the track velocity over (t - t_last).
BoxF predict_box(const Track& track, std::uint64_t t);

struct AssignmentPlan {
  struct Shared {
    std::size_t proposal = 0;
    std::vector<std::size_t> trackers;  // owner first, then sharers by slot
  };
  struct Spawn {
    std::size_t proposal = 0;
    std::size_t slot = 0;
  };

  // Per tracker slot: proposals it owns (highest ratio above threshold).
  std::vector<std::vector<std::size_t>> owned;
  // Proposals also above threshold for trackers that own nothing else.
  std::vector<Shared> shared;
  std::vector<Spawn> spawn;
  std::vector<std::size_t> dropped;
};

AssignmentPlan assign_proposals(std::span<const Track> trackers, std::span<const RegionProposal> proposals,
                                std::uint64_t t, const EotConfig& cfg);

/// Weighted-average update of a matched track. Throws Error(non_positive_dt)
/// unless t > track.t_last.
Track update_track(const Track& track, const BoxF& r_new, std::uint64_t t, const EotConfig& cfg);

/// Union bounding box of the proposals and the tracker's predicted box.
BoxF merge_shared_proposals(std::span<const BoxF> group, const BoxF& predicted);

bool common_direction(const Track& a, const Track& b);

OcclusionContext occlusion_context(const Track& a, const Track& b, const BoxF& shared,
                                   double previous_shared_width);

/// Position of one tracker inside a shared region.
BoxF place_in_occlusion(const Track& t, const BoxF& shared, const OcclusionContext& ctx);

/// Boxes for a and b. `ctx` is evaluated for a; b uses the same cd/wi and its
/// own hvo. Throws Error(missing_pre_occlusion_size).
std::pair<BoxF, BoxF> resolve_occlusion(const Track& a, const Track& b, const BoxF& shared,
                                        const OcclusionContext& ctx);

/// True when the velocity-shifted boxes overlap one or two frame steps ahead.
bool will_collide(const Track& a, const Track& b, std::uint64_t t, std::uint64_t step_us);

/// Increments unlock counters of unmatched trackers and releases lost or
/// out-of-scene trackers. `lookahead_us` is the prediction horizon used for the
/// out-of-bounds test.
void cleanup(std::vector<Track>& trackers, const std::vector<bool>& matched, SensorGeometry geometry,
             const EotConfig& cfg, std::uint64_t lookahead_us);

/// Linear interpolation over a time-ordered history of one track. Valid for
/// t in [front.t, back.t]; throws Error(out_of_range) otherwise.
BoxF interpolate(std::span<const TrackSnapshot> history, std::uint64_t t);
TrackSnapshot interpolate_snapshot(std::span<const TrackSnapshot> history, std::uint64_t t);

class EotTracker {
 public:
  EotTracker(SensorGeometry geometry, EotConfig cfg, std::uint64_t frame_period_us);

  /// One frame: assignment, merge/occlusion resolution, update, cleanup.
  /// Returns one snapshot per non-free tracker.
  std::vector<TrackSnapshot> step(std::span<const RegionProposal> proposals, std::uint64_t t);

  std::span<const Track> tracks() const { return tracks_; }
  std::size_t active_count() const;
  const EotConfig& config() const { return cfg_; }

  // Optional diagnostics sink.
  void set_log(std::ostream* log) { log_ = log; }

 private:
  SensorGeometry geometry_;
  EotConfig cfg_;
  std::uint64_t period_us_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 1;
  std::ostream* log_ = nullptr;
};

}  // namespace evtrack
