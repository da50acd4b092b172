#include "evtrack/ceot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evtrack/error.hpp"

namespace evtrack {

namespace {

constexpr double kMicro = 1e-6;

bool same_sign(double a, double b) { return (a >= 0.0) == (b >= 0.0); }

// D_alpha / D_beta along one axis.
std::pair<bool, bool> velocity_gates(double va, double vb, const CeotConfig& cfg) {
  const double diff = std::abs(va - vb);
  if (same_sign(va, vb)) return {diff > cfg.v_alpha, false};
  return {false, diff > cfg.v_beta};
}

std::pair<double, double> velocity_of(const CTrackerMotion& m) {
  if (m.frozen_velocity) return *m.frozen_velocity;
  return {m.vx, m.vy};
}

bool rects_overlap(double ax, double ay, double adx, double ady, double bx, double by, double bdx, double bdy) {
  return std::abs(ax - bx) <= adx + bdx && std::abs(ay - by) <= ady + bdy;
}

}  // namespace

void CeotConfig::validate() const {
  if (pool_size < 1) throw Error(Errc::invalid_config, "ceot.pool_size must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::invalid_config, "ceot.alpha must be in (0, 1)");
  if (!(alpha_t > 0.0 && alpha_t < 1.0)) throw Error(Errc::invalid_config, "ceot.alpha_t must be in (0, 1)");
  if (!(theta_active > 0.0)) throw Error(Errc::invalid_config, "ceot.theta_active must be > 0");
  if (cleanup_period_us == 0) throw Error(Errc::invalid_config, "ceot.cleanup_period_us must be > 0");
  if (!(v_alpha >= 0.0) || !(v_beta >= 0.0)) throw Error(Errc::invalid_config, "ceot velocity thresholds must be >= 0");
  if (!(p_threshold > 0.0)) throw Error(Errc::invalid_config, "ceot.p_threshold must be > 0");
  if (occlusion_timestep_us == 0) throw Error(Errc::invalid_config, "ceot.occlusion_timestep_us must be > 0");
  if (!(min_half_size > 0.0)) throw Error(Errc::invalid_config, "ceot.min_half_size must be > 0");
  if (!(init_half_size >= min_half_size)) {
    throw Error(Errc::invalid_config, "ceot.init_half_size must be >= min_half_size");
  }
  if (!(init_isi_us >= 0.0)) throw Error(Errc::invalid_config, "ceot.init_isi_us must be >= 0");
  if (!(size_alpha > 0.0 && size_alpha < 1.0)) throw Error(Errc::invalid_config, "ceot.size_alpha must be in (0, 1)");
  if (!(size_gain > 0.0)) throw Error(Errc::invalid_config, "ceot.size_gain must be > 0");
  if (!(size_window >= 1.0)) throw Error(Errc::invalid_config, "ceot.size_window must be >= 1");
  if (velocity_sample_us == 0) throw Error(Errc::invalid_config, "ceot.velocity_sample_us must be > 0");
}

bool CTracker::contains(double px, double py) const {
  return std::abs(px - x) <= dx && std::abs(py - y) <= dy;
}

AssignmentOutcome assign_event(std::span<const CTracker> pool, double x, double y) {
  AssignmentOutcome out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].active && pool[i].contains(x, y)) out.matched.push_back(i);
  }
  if (!out.matched.empty()) {
    out.kind = AssignmentOutcome::Kind::matched_active;
    out.target = out.matched.front();
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].active) continue;
    const double d = std::hypot(pool[i].x - x, pool[i].y - y);
    if (d < best) {
      best = d;
      out.target = i;
      out.kind = AssignmentOutcome::Kind::nearest_inactive;
    }
  }
  return out;
}

void adapt_extent(CTracker& tr, double ex, double ey, const CeotConfig& cfg, SensorGeometry geometry) {
  if (cfg.size_adapt != SizeAdapt::ema) return;
  const double max_dx = std::max(cfg.min_half_size, 0.5 * geometry.width);
  const double max_dy = std::max(cfg.min_half_size, 0.5 * geometry.height);
  const double rx = std::abs(ex - tr.x);
  const double ry = std::abs(ey - tr.y);
  // Far events (e.g. while the tracker travels to a new object) carry no
  // information about its extent.
  if (std::max(rx / tr.dx, ry / tr.dy) > cfg.size_window) return;
  const double as = cfg.size_alpha;
  tr.dx = std::clamp(as * tr.dx + (1.0 - as) * cfg.size_gain * rx, cfg.min_half_size, max_dx);
  tr.dy = std::clamp(as * tr.dy + (1.0 - as) * cfg.size_gain * ry, cfg.min_half_size, max_dy);
}

void update_ctracker(CTracker& tr, CTrackerMotion& m, const Stimulus& s, bool inside, const CeotConfig& cfg,
                     SensorGeometry geometry) {
  if (s.t < tr.t_last) {
    throw Error(Errc::non_positive_dt,
                "event at t=" + std::to_string(s.t) + " precedes tracker update at t=" + std::to_string(tr.t_last));
  }
  const double a = cfg.alpha;
  const double rx = s.x - tr.x;
  const double ry = s.y - tr.y;
  m.cov_xx = a * m.cov_xx + (1.0 - a) * rx * rx;
  m.cov_xy = a * m.cov_xy + (1.0 - a) * rx * ry;
  m.cov_yy = a * m.cov_yy + (1.0 - a) * ry * ry;

  if (m.occluding_with) {
    // Dead reckoning with the frozen velocity; size and velocity untouched.
    const auto [fvx, fvy] = velocity_of(m);
    const double dt = s.t > m.t_pos ? static_cast<double>(s.t - m.t_pos) * kMicro : 0.0;
    tr.x += fvx * dt;
    tr.y += fvy * dt;
  } else {
    if (!s.synthetic) adapt_extent(tr, s.x, s.y, cfg, geometry);
    tr.x = a * tr.x + (1.0 - a) * s.x;
    tr.y = a * tr.y + (1.0 - a) * s.y;
    if (s.t >= m.sample_t + cfg.velocity_sample_us) {
      const double dt = static_cast<double>(s.t - m.sample_t) * kMicro;
      m.vx = a * m.vx + (1.0 - a) * (tr.x - m.sample_x) / dt;
      m.vy = a * m.vy + (1.0 - a) * (tr.y - m.sample_y) / dt;
      m.sample_t = s.t;
      m.sample_x = tr.x;
      m.sample_y = tr.y;
    }
  }
  m.t_pos = std::max(m.t_pos, s.t);

  if (inside) {
    tr.isi = cfg.alpha_t * tr.isi + (1.0 - cfg.alpha_t) * static_cast<double>(s.t - tr.t_last);
    tr.t_last = s.t;
  }
  tr.active = tr.isi * tr.dx * tr.dy < cfg.theta_active;
}

bool occlusion_gate(bool d_alpha, bool d_beta, bool p_d) { return p_d && (d_alpha || d_beta); }

OcclusionGates occlusion_gates(const CTrackerMotion& a, const CTrackerMotion& b, const CeotConfig& cfg) {
  OcclusionGates g;
  const auto [avx, avy] = velocity_of(a);
  const auto [bvx, bvy] = velocity_of(b);
  std::tie(g.d_alpha, g.d_beta) = velocity_gates(avx, bvx, cfg);
  if (cfg.occlusion_axis == OcclusionAxis::both) {
    const auto [ya, yb] = velocity_gates(avy, bvy, cfg);
    g.d_alpha = g.d_alpha || ya;
    g.d_beta = g.d_beta || yb;
  }
  g.p_d = a.cov_trace() < cfg.p_threshold && b.cov_trace() < cfg.p_threshold;
  return g;
}

bool projected_overlap(const CTracker& a, const CTrackerMotion& am, const CTracker& b, const CTrackerMotion& bm,
                       const CeotConfig& cfg) {
  const auto [avx, avy] = velocity_of(am);
  const auto [bvx, bvy] = velocity_of(bm);
  const double step = static_cast<double>(cfg.occlusion_timestep_us) * kMicro;
  for (int n = 1; n <= 2; ++n) {
    const double h = step * n;
    if (rects_overlap(a.x + avx * h, a.y + avy * h, a.dx, a.dy, b.x + bvx * h, b.y + bvy * h, b.dx, b.dy)) {
      return true;
    }
  }
  return false;
}

bool detect_occlusion(const CTracker& a, const CTrackerMotion& am, const CTracker& b, const CTrackerMotion& bm,
                      const CeotConfig& cfg) {
  const OcclusionGates g = occlusion_gates(am, bm, cfg);
  if (!occlusion_gate(g.d_alpha, g.d_beta, g.p_d)) return false;
  return projected_overlap(a, am, b, bm, cfg);
}

bool merge_condition(const CTracker& a, const CTracker& b) {
  return a.active && b.active && std::abs(a.x - b.x) <= a.dx + b.dx && std::abs(a.y - b.y) <= a.dy + b.dy;
}

CTracker merge_trackers(const CTracker& keep, const CTracker& other, SensorGeometry geometry) {
  const bool keep_larger = keep.dx * keep.dy >= other.dx * other.dy;
  const CTracker& larger = keep_larger ? keep : other;
  const CTracker& smaller = keep_larger ? other : keep;
  CTracker out = keep;
  out.x = 0.5 * (keep.x + other.x);
  out.y = 0.5 * (keep.y + other.y);
  if (larger.contains(smaller.x, smaller.y)) {
    out.dx = larger.dx;
    out.dy = larger.dy;
  } else {
    out.dx = std::min(keep.dx + other.dx, std::max(larger.dx, 0.5 * geometry.width));
    out.dy = std::min(keep.dy + other.dy, std::max(larger.dy, 0.5 * geometry.height));
  }
  // The merged tracker receives both event streams: rates add.
  if (keep.isi > 0.0 && other.isi > 0.0) out.isi = keep.isi * other.isi / (keep.isi + other.isi);
  else out.isi = 0.0;
  out.t_last = std::max(keep.t_last, other.t_last);
  return out;
}

CeotTracker::CeotTracker(SensorGeometry geometry, CeotConfig cfg)
    : geometry_(geometry), cfg_(cfg), rng_(cfg.rng_seed, 0x0CE07), next_tick_(cfg.cleanup_period_us) {
  cfg_.validate();
  pool_.resize(cfg_.pool_size);
  motion_.resize(cfg_.pool_size);
  matched_.reserve(cfg_.pool_size);
  for (std::size_t i = 0; i < pool_.size(); ++i) reinitialize(i, 0);
}

std::size_t CeotTracker::active_count() const {
  return static_cast<std::size_t>(std::count_if(pool_.begin(), pool_.end(), [](const CTracker& t) { return t.active; }));
}

void CeotTracker::seed(std::size_t slot, const CTracker& tracker, const CTrackerMotion& motion) {
  if (slot >= pool_.size()) throw Error(Errc::out_of_range, "tracker slot " + std::to_string(slot));
  if (motion_[slot].occluding_with) end_occlusion(slot, tracker.t_last);
  pool_[slot] = tracker;
  motion_[slot] = motion;
  CTrackerMotion& m = motion_[slot];
  m.sample_t = m.t_pos = m.active_since = tracker.t_last;
  m.sample_x = tracker.x;
  m.sample_y = tracker.y;
  if (tracker.active && tracker.id == 0) {
    pool_[slot].id = next_id_++;
    ++counters_.activations;
  }
  next_id_ = std::max(next_id_, pool_[slot].id + 1);
}

void CeotTracker::reinitialize(std::size_t i, std::uint64_t t) {
  CTracker& tr = pool_[i];
  tr = CTracker{};
  tr.x = rng_.uniform(0.0, static_cast<double>(geometry_.width));
  tr.y = rng_.uniform(0.0, static_cast<double>(geometry_.height));
  tr.dx = tr.dy = cfg_.init_half_size;
  tr.isi = cfg_.init_isi_us;
  tr.t_last = t;
  CTrackerMotion& m = motion_[i];
  m = CTrackerMotion{};
  m.sample_t = m.t_pos = t;
  m.sample_x = tr.x;
  m.sample_y = tr.y;
}

void CeotTracker::apply(std::size_t i, const Stimulus& s, bool inside) {
  CTracker& tr = pool_[i];
  CTrackerMotion& m = motion_[i];
  const bool was_active = tr.active;
  update_ctracker(tr, m, s, inside, cfg_, geometry_);
  if (tr.active && !was_active) {
    tr.id = next_id_++;
    ++counters_.activations;
    m.vx = m.vy = 0.0;
    m.active_since = s.t;
    m.sample_t = s.t;
    m.sample_x = tr.x;
    m.sample_y = tr.y;
  } else if (!tr.active && was_active && m.occluding_with) {
    end_occlusion(i, s.t);
  }
}

void CeotTracker::begin_occlusion(std::size_t i, std::size_t j, std::uint64_t t) {
  for (std::size_t k : {i, j}) {
    CTrackerMotion& m = motion_[k];
    m.occluding_with = k == i ? j : i;
    m.frozen_velocity = std::make_pair(m.vx, m.vy);
    m.frozen_size = std::make_pair(pool_[k].dx, pool_[k].dy);
  }
  occlusions_.push_back(OcclusionRecord{t, std::min(i, j), std::max(i, j), true});
}

void CeotTracker::end_occlusion(std::size_t i, std::uint64_t t) {
  if (!motion_[i].occluding_with) return;
  const std::size_t j = *motion_[i].occluding_with;
  for (std::size_t k : {i, j}) {
    CTrackerMotion& m = motion_[k];
    m.occluding_with.reset();
    m.frozen_velocity.reset();
    m.frozen_size.reset();
    m.sample_t = std::max(m.t_pos, t);
    m.sample_x = pool_[k].x;
    m.sample_y = pool_[k].y;
  }
  occlusions_.push_back(OcclusionRecord{t, std::min(i, j), std::max(i, j), false});
}

bool CeotTracker::mature(std::size_t i, std::uint64_t t) const {
  return pool_[i].active && t >= motion_[i].active_since + cfg_.occlusion_min_age_us;
}

void CeotTracker::check_pair(std::size_t i, std::size_t j, std::uint64_t t) {
  const auto& oi = motion_[i].occluding_with;
  const auto& oj = motion_[j].occluding_with;
  if (oi && *oi == j) {
    if (!projected_overlap(pool_[i], motion_[i], pool_[j], motion_[j], cfg_)) end_occlusion(i, t);
    return;
  }
  if (oi || oj || !mature(i, t) || !mature(j, t)) return;
  if (detect_occlusion(pool_[i], motion_[i], pool_[j], motion_[j], cfg_)) begin_occlusion(i, j, t);
}

void CeotTracker::observe_margin(double ex, double ey) {
  if (cfg_.size_window <= 1.0 || cfg_.size_adapt != SizeAdapt::ema) return;
  std::size_t best = pool_.size();
  double best_r = cfg_.size_window;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    const CTracker& tr = pool_[i];
    if (!tr.active || motion_[i].occluding_with) continue;
    const double r = std::max(std::abs(ex - tr.x) / tr.dx, std::abs(ey - tr.y) / tr.dy);
    if (r <= best_r) {
      best_r = r;
      best = i;
    }
  }
  if (best < pool_.size()) adapt_extent(pool_[best], ex, ey, cfg_, geometry_);
}

void CeotTracker::handle(const Event& e) {
  const double ex = e.x;
  const double ey = e.y;
  matched_.clear();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].active && pool_[i].contains(ex, ey)) matched_.push_back(i);
  }
  const Stimulus s{ex, ey, e.t, false};
  if (!matched_.empty()) {
    ++counters_.matched_active;
    const std::size_t target = matched_.front();
    for (std::size_t k = 1; k < matched_.size(); ++k) check_pair(target, matched_[k], e.t);
    const auto partner = motion_[target].occluding_with;
    apply(target, s, true);
    if (partner && motion_[*partner].occluding_with == target) {
      apply(*partner, s, pool_[*partner].contains(ex, ey));
    }
    return;
  }
  observe_margin(ex, ey);
  std::size_t best = pool_.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].active) continue;
    const double d = std::hypot(pool_[i].x - ex, pool_[i].y - ey);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best == pool_.size()) {
    ++counters_.dropped;
    return;
  }
  ++counters_.nearest_inactive;
  apply(best, s, pool_[best].contains(ex, ey));
}

void CeotTracker::push(const Event& e) {
  while (e.t >= next_tick_) {
    cleanup(next_tick_);
    next_tick_ += cfg_.cleanup_period_us;
  }
  handle(e);
}

void CeotTracker::push(std::span<const Event> events) {
  for (const Event& e : events) push(e);
}

void CeotTracker::finish(std::uint64_t t_end) {
  while (next_tick_ <= t_end) {
    cleanup(next_tick_);
    next_tick_ += cfg_.cleanup_period_us;
  }
}

void CeotTracker::cleanup(std::uint64_t t_now) {
  const std::size_t n = pool_.size();
  for (std::size_t i = 0; i < n; ++i) {
    apply(i, Stimulus{pool_[i].x, pool_[i].y, t_now, true}, true);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = motion_[i].occluding_with;
    if (p && *p > i && !projected_overlap(pool_[i], motion_[i], pool_[*p], motion_[*p], cfg_)) {
      end_occlusion(i, t_now);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!pool_[i].active || !merge_condition(pool_[i], pool_[j])) continue;
      if (motion_[i].occluding_with || motion_[j].occluding_with) continue;
      // Touching trackers that are moving apart are separate objects.
      if (!projected_overlap(pool_[i], motion_[i], pool_[j], motion_[j], cfg_)) continue;
      if (mature(i, t_now) && mature(j, t_now)) {
        // Clearly different motions: two objects, never merged.
        const OcclusionGates g = occlusion_gates(motion_[i], motion_[j], cfg_);
        if (g.d_alpha || g.d_beta) {
          if (g.p_d) begin_occlusion(i, j, t_now);
          continue;
        }
      }
      // The longer-lived track keeps its identity.
      const bool i_keeps = pool_[i].id <= pool_[j].id;
      const std::size_t keep = i_keeps ? i : j;
      const std::size_t gone = i_keeps ? j : i;
      MergeRecord rec{t_now, keep, gone, pool_[keep], pool_[gone], {}};
      pool_[keep] = merge_trackers(pool_[keep], pool_[gone], geometry_);
      reinitialize(gone, t_now);
      rec.absorbed_after = pool_[gone];
      merges_.push_back(rec);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const CTracker& tr = pool_[i];
    if (!tr.active) continue;
    snapshots_.push_back(TrackSnapshot{tr.id, t_now, tr.box(), TrackState::locked, motion_[i].vx, motion_[i].vy});
  }
  if (on_tick_) on_tick_(*this, t_now);
}

}  // namespace evtrack
