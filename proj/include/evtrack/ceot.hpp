#pragma once

// Continuous-time events overlap tracker.
//
// A fixed pool of rectangular trackers is updated event by event. An event
// inside an active tracker updates that tracker; otherwise it pulls the
// nearest inactive tracker towards it. A tracker is active while its average
// inter-spike interval scaled by its half-extent product stays below
// theta_active. Every cleanup period a synthetic event at each tracker centre
// ages idle trackers, overlapping active trackers are merged, and one snapshot
// per active tracker is emitted.
//
// Two active trackers claiming the same event are checked for occlusion
// (velocity difference, residual covariance, projected overlap). While
// occluding, both partners receive the events of either, keep their size and
// velocity frozen, and move by dead reckoning until their projected boxes no
// longer overlap.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "evtrack/synth.hpp"
#include "evtrack/types.hpp"

namespace evtrack {

enum class OcclusionAxis { x_only, both };
enum class SizeAdapt { ema, fixed };

struct CeotConfig {
  std::size_t pool_size = 8;
  double alpha = 0.95;    // position / velocity / covariance EMA
  double alpha_t = 0.9;   // inter-spike interval EMA
  double theta_active = 1e6;  // us * px^2
  std::uint64_t cleanup_period_us = 25000;
  double v_alpha = 20.0;  // px/s, same-direction velocity difference
  double v_beta = 10.0;   // px/s, opposite-direction velocity difference
  double p_threshold = 400.0;  // px^2, bound on the covariance trace
  std::uint64_t occlusion_timestep_us = 25000;
  double init_half_size = 15.0;
  double init_isi_us = 100000.0;
  double size_gain = 1.8;       // half-extent ~ gain * mean |residual|
  double size_alpha = 0.998;    // half-extent EMA
  // Only events within this multiple of a tracker's extent adapt its size.
  // Events claimed by no active tracker but inside the window of one still
  // update that tracker's size (not its position or rate).
  double size_window = 1.5;
  double min_half_size = 3.0;
  std::uint64_t velocity_sample_us = 25000;
  std::uint64_t occlusion_min_age_us = 250000;  // activity needed before occlusion checks
  SizeAdapt size_adapt = SizeAdapt::ema;
  OcclusionAxis occlusion_axis = OcclusionAxis::both;
  std::uint64_t rng_seed = 7;

  void validate() const;
};

struct CTracker {
  std::int64_t id = 0;  // assigned on activation
  double x = 0.0;       // centre
  double y = 0.0;
  double dx = 0.0;      // half-width
  double dy = 0.0;      // half-height
  bool active = false;
  double isi = 0.0;     // us
  std::uint64_t t_last = 0;

  BoxF box() const { return BoxF{x - dx, y - dy, 2.0 * dx, 2.0 * dy}; }
  bool contains(double px, double py) const;
};

struct CTrackerMotion {
  double vx = 0.0;  // px/s
  double vy = 0.0;
  double cov_xx = 0.0;  // residual covariance, px^2
  double cov_xy = 0.0;
  double cov_yy = 0.0;
  std::optional<std::size_t> occluding_with;  // partner pool slot
  std::optional<std::pair<double, double>> frozen_velocity;
  std::optional<std::pair<double, double>> frozen_size;

  // Velocity sampling reference and dead-reckoning clock.
  std::uint64_t sample_t = 0;
  double sample_x = 0.0;
  double sample_y = 0.0;
  std::uint64_t t_pos = 0;
  std::uint64_t active_since = 0;

  double cov_trace() const { return cov_xx + cov_yy; }
};

/// Input to a tracker update: a real event or a cleanup-generated one.
struct Stimulus {
  double x = 0.0;
  double y = 0.0;
  std::uint64_t t = 0;
  bool synthetic = false;
};

struct AssignmentOutcome {
  enum class Kind { matched_active, nearest_inactive, dropped };
  Kind kind = Kind::dropped;
  std::vector<std::size_t> matched;  // all active trackers containing the event, pool order
  std::size_t target = 0;            // tracker to update
};

AssignmentOutcome assign_event(std::span<const CTracker> pool, double x, double y);

/// Applies one stimulus to a tracker. `inside` tells whether the stimulus lies
/// within the rectangle before the update. Throws Error(non_positive_dt) when
/// the stimulus precedes the tracker's last update.
/// Half-extent EMA towards size_gain * |residual| for events within
/// size_window of the current extent (no-op for fixed size).
void adapt_extent(CTracker& tr, double ex, double ey, const CeotConfig& cfg, SensorGeometry geometry);

void update_ctracker(CTracker& tr, CTrackerMotion& motion, const Stimulus& s, bool inside,
                     const CeotConfig& cfg, SensorGeometry geometry);

struct OcclusionGates {
  bool d_alpha = false;
  bool d_beta = false;
  bool p_d = false;
};

/// P_d and (D_alpha or D_beta).
bool occlusion_gate(bool d_alpha, bool d_beta, bool p_d);

OcclusionGates occlusion_gates(const CTrackerMotion& a, const CTrackerMotion& b, const CeotConfig& cfg);

/// Overlap of the two rectangles shifted by their (frozen, when set) velocities
/// over one or two occlusion timesteps (touching counts as overlap).
bool projected_overlap(const CTracker& a, const CTrackerMotion& am, const CTracker& b, const CTrackerMotion& bm,
                       const CeotConfig& cfg);

bool detect_occlusion(const CTracker& a, const CTrackerMotion& am, const CTracker& b, const CTrackerMotion& bm,
                      const CeotConfig& cfg);

/// Both active and rectangles touching or overlapping (inclusive bounds).
bool merge_condition(const CTracker& a, const CTracker& b);

/// Merge of two trackers; `keep` supplies the identity and rate state. The
/// result size is the larger tracker's when the smaller centre lies inside it,
/// otherwise the sum of both half-extents, clamped to half the sensor. Event
/// rates add, so the inter-spike interval is the harmonic combination.
CTracker merge_trackers(const CTracker& keep, const CTracker& other, SensorGeometry geometry);

struct CeotCounters {
  std::uint64_t matched_active = 0;
  std::uint64_t nearest_inactive = 0;
  std::uint64_t dropped = 0;
  std::uint64_t activations = 0;
};

struct MergeRecord {
  std::uint64_t t = 0;
  std::size_t kept = 0;
  std::size_t absorbed = 0;
  CTracker kept_before;
  CTracker absorbed_before;
  CTracker absorbed_after;
};

struct OcclusionRecord {
  std::uint64_t t = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  bool begin = true;
};

class CeotTracker {
 public:
  CeotTracker(SensorGeometry geometry, CeotConfig cfg);

  /// Processes one event; runs any cleanup ticks that fall at or before it.
  void push(const Event& e);
  void push(std::span<const Event> events);

  /// Runs the remaining cleanup ticks up to and including t_end.
  void finish(std::uint64_t t_end);

  /// One cleanup pass at t_now (ages trackers, merges, emits snapshots).
  void cleanup(std::uint64_t t_now);

  std::span<const CTracker> pool() const { return pool_; }
  std::span<const CTrackerMotion> motions() const { return motion_; }
  std::span<const TrackSnapshot> snapshots() const { return snapshots_; }
  std::vector<TrackSnapshot> take_snapshots() { return std::move(snapshots_); }
  const CeotCounters& counters() const { return counters_; }
  std::span<const MergeRecord> merges() const { return merges_; }
  std::span<const OcclusionRecord> occlusions() const { return occlusions_; }
  std::uint64_t next_tick() const { return next_tick_; }
  const CeotConfig& config() const { return cfg_; }
  std::size_t active_count() const;

  /// Overwrites one pool slot, e.g. to start from a known configuration. The
  /// velocity sampling and dead-reckoning clocks restart at tracker.t_last.
  void seed(std::size_t slot, const CTracker& tracker, const CTrackerMotion& motion = {});

  void set_on_tick(std::function<void(const CeotTracker&, std::uint64_t)> fn) { on_tick_ = std::move(fn); }

 private:
  void handle(const Event& e);
  void observe_margin(double ex, double ey);
  void apply(std::size_t i, const Stimulus& s, bool inside);
  bool mature(std::size_t i, std::uint64_t t) const;
  void check_pair(std::size_t i, std::size_t j, std::uint64_t t);
  void begin_occlusion(std::size_t i, std::size_t j, std::uint64_t t);
  void end_occlusion(std::size_t i, std::uint64_t t);
  void reinitialize(std::size_t i, std::uint64_t t);

  SensorGeometry geometry_;
  CeotConfig cfg_;
  Rng rng_;
  std::vector<CTracker> pool_;
  std::vector<CTrackerMotion> motion_;
  std::vector<std::size_t> matched_;
  std::vector<TrackSnapshot> snapshots_;
  std::vector<MergeRecord> merges_;
  std::vector<OcclusionRecord> occlusions_;
  CeotCounters counters_;
  std::uint64_t next_tick_;
  std::int64_t next_id_ = 1;
  std::function<void(const CeotTracker&, std::uint64_t)> on_tick_;
};

}  // namespace evtrack
