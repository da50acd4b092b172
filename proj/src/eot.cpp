#include "evtrack/eot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evtrack/error.hpp"

namespace evtrack {

namespace {

constexpr double kMicro = 1e-6;

void release_track(Track& t) {
  t.state = TrackState::free;
  t.id = 0;
  t.vx = t.vy = 0.0;
  t.unlock_count = 0;
  t.pre_occlusion_size.reset();
  t.occlusion_partner.reset();
  t.shared_width = 0.0;
}

void clear_occlusion(Track& t) {
  t.pre_occlusion_size.reset();
  t.occlusion_partner.reset();
  t.shared_width = 0.0;
}

void promote(Track& t) {
  t.state = t.state == TrackState::free ? TrackState::tracking : TrackState::locked;
}

}  // namespace

void EotConfig::validate() const {
  if (max_trackers < 1) throw Error(Errc::invalid_config, "eot.max_trackers must be >= 1");
  if (!(overlap_ratio_threshold > 0.0 && overlap_ratio_threshold < 1.0)) {
    throw Error(Errc::invalid_config, "eot.overlap_ratio_threshold must be in (0, 1)");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(Errc::invalid_config, "eot.alpha must be in [0, 1)");
  if (max_unlocks < 0) throw Error(Errc::invalid_config, "eot.max_unlocks must be >= 0");
}

double Track::speed() const { return std::hypot(vx, vy); }

double overlap_ratio(const BoxF& tracker, const BoxF& proposal) {
  const double denom = std::min(tracker.area(), proposal.area());
  if (denom <= 0.0) return 0.0;
  return overlap_area(tracker, proposal) / denom;
}

BoxF predict_box(const Track& track, std::uint64_t t) {
  const double dt = (static_cast<double>(t) - static_cast<double>(track.t_last)) * kMicro;
  return shifted(track.box, track.vx * dt, track.vy * dt);
}

AssignmentPlan assign_proposals(std::span<const Track> trackers, std::span<const RegionProposal> proposals,
                                std::uint64_t t, const EotConfig& cfg) {
  const std::size_t nt = trackers.size();
  const std::size_t np = proposals.size();
  AssignmentPlan plan;
  plan.owned.resize(nt);

  std::vector<BoxF> predicted(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!trackers[i].is_free()) predicted[i] = predict_box(trackers[i], t);
  }
  std::vector<double> ratio(nt * np, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    if (trackers[i].is_free()) continue;
    for (std::size_t j = 0; j < np; ++j) ratio[i * np + j] = overlap_ratio(predicted[i], proposals[j].box);
  }
  auto r = [&](std::size_t i, std::size_t j) { return ratio[i * np + j]; };
  auto candidate = [&](std::size_t i, std::size_t j) {
    return !trackers[i].is_free() && r(i, j) > cfg.overlap_ratio_threshold;
  };

  // Each proposal goes to its best tracker; ties go to the lower id.
  std::vector<std::size_t> owner(np, nt);
  for (std::size_t j = 0; j < np; ++j) {
    for (std::size_t i = 0; i < nt; ++i) {
      if (!candidate(i, j)) continue;
      const std::size_t o = owner[j];
      if (o == nt || r(i, j) > r(o, j) || (r(i, j) == r(o, j) && trackers[i].id < trackers[o].id)) {
        owner[j] = i;
      }
    }
    if (owner[j] != nt) plan.owned[owner[j]].push_back(j);
  }

  // Trackers that lost every candidate to another tracker share their best one.
  std::vector<std::size_t> shared_index(np, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < nt; ++i) {
    if (trackers[i].is_free() || !plan.owned[i].empty()) continue;
    std::size_t best = np;
    for (std::size_t j = 0; j < np; ++j) {
      if (candidate(i, j) && (best == np || r(i, j) > r(i, best))) best = j;
    }
    if (best == np) continue;
    if (shared_index[best] == std::numeric_limits<std::size_t>::max()) {
      shared_index[best] = plan.shared.size();
      plan.shared.push_back({best, {owner[best]}});
    }
    plan.shared[shared_index[best]].trackers.push_back(i);
  }

  std::size_t next_free = 0;
  for (std::size_t j = 0; j < np; ++j) {
    if (owner[j] != nt) continue;
    while (next_free < nt && !trackers[next_free].is_free()) ++next_free;
    if (next_free < nt) {
      plan.spawn.push_back({j, next_free});
      ++next_free;
    } else {
      plan.dropped.push_back(j);
    }
  }
  return plan;
}

Track update_track(const Track& track, const BoxF& r_new, std::uint64_t t, const EotConfig& cfg) {
  if (t <= track.t_last) {
    throw Error(Errc::non_positive_dt, "update at t=" + std::to_string(t) + " not after t_last=" +
                                           std::to_string(track.t_last));
  }
  const double dt = static_cast<double>(t - track.t_last) * kMicro;
  const double a = cfg.alpha;
  const BoxF& prev = track.box;

  Track out = track;
  out.box.x = (1.0 - a) * r_new.x + a * (prev.x + track.vx * dt);
  out.box.y = (1.0 - a) * r_new.y + a * (prev.y + track.vy * dt);
  out.box.w = (1.0 - a) * r_new.w + a * prev.w;
  out.box.h = (1.0 - a) * r_new.h + a * prev.h;

  const double size_x = cfg.velocity_position_only ? 0.0 : (r_new.w - prev.w);
  const double size_y = cfg.velocity_position_only ? 0.0 : (r_new.h - prev.h);
  out.vx = (1.0 - a) * ((r_new.x - prev.x) + size_x) / dt + a * track.vx;
  out.vy = (1.0 - a) * ((r_new.y - prev.y) + size_y) / dt + a * track.vy;

  promote(out);
  out.unlock_count = 0;
  out.t_last = t;
  return out;
}

BoxF merge_shared_proposals(std::span<const BoxF> group, const BoxF& predicted) {
  if (group.empty()) return predicted;
  if (group.size() == 1) return group.front();
  BoxF out = predicted;
  for (const BoxF& b : group) out = union_box(out, b);
  return out;
}

bool common_direction(const Track& a, const Track& b) {
  const double sum = std::hypot(a.vx + b.vx, a.vy + b.vy);
  return sum > std::max(a.speed(), b.speed());
}

OcclusionContext occlusion_context(const Track& a, const Track& b, const BoxF& shared,
                                   double previous_shared_width) {
  return OcclusionContext{common_direction(a, b), shared.w > previous_shared_width, a.speed() > b.speed()};
}

BoxF place_in_occlusion(const Track& t, const BoxF& shared, const OcclusionContext& ctx) {
  if (!t.pre_occlusion_size) {
    throw Error(Errc::missing_pre_occlusion_size, "track " + std::to_string(t.id));
  }
  if (!ctx.wi) return shared;
  const Extent o = *t.pre_occlusion_size;
  // Leading side along the direction of motion; a non-negative velocity leads
  // towards the right/bottom edge of the shared region.
  const double lead_x = t.vx >= 0.0 ? shared.x + shared.w - o.w : shared.x;
  const double lead_y = t.vy >= 0.0 ? shared.y + shared.h - o.h : shared.y;
  const double trail_x = t.vx >= 0.0 ? shared.x : shared.x + shared.w - o.w;
  const double trail_y = t.vy >= 0.0 ? shared.y : shared.y + shared.h - o.h;
  if (!ctx.cd || ctx.hvo) return BoxF{lead_x, lead_y, o.w, o.h};
  return BoxF{trail_x, trail_y, o.w, o.h};
}

std::pair<BoxF, BoxF> resolve_occlusion(const Track& a, const Track& b, const BoxF& shared,
                                        const OcclusionContext& ctx) {
  if (!a.pre_occlusion_size || !b.pre_occlusion_size) {
    throw Error(Errc::missing_pre_occlusion_size,
                "tracks " + std::to_string(a.id) + "/" + std::to_string(b.id));
  }
  OcclusionContext ctx_b = ctx;
  ctx_b.hvo = b.speed() > a.speed();
  return {place_in_occlusion(a, shared, ctx), place_in_occlusion(b, shared, ctx_b)};
}

bool will_collide(const Track& a, const Track& b, std::uint64_t t, std::uint64_t step_us) {
  for (std::uint64_t n = 0; n < 2; ++n) {
    const std::uint64_t at = t + n * step_us;
    if (overlap_area(predict_box(a, at), predict_box(b, at)) > 0.0) return true;
  }
  return false;
}

void cleanup(std::vector<Track>& trackers, const std::vector<bool>& matched, SensorGeometry geometry,
             const EotConfig& cfg, std::uint64_t lookahead_us) {
  const double look = static_cast<double>(lookahead_us) * kMicro;
  for (std::size_t i = 0; i < trackers.size(); ++i) {
    Track& t = trackers[i];
    if (t.is_free()) continue;
    if (!matched[i]) ++t.unlock_count;
    const double cx = t.box.cx() + t.vx * look;
    const double cy = t.box.cy() + t.vy * look;
    const bool out_of_scene = cx < 0.0 || cy < 0.0 || cx >= static_cast<double>(geometry.width) ||
                              cy >= static_cast<double>(geometry.height);
    if (t.unlock_count > cfg.max_unlocks || out_of_scene) release_track(t);
  }
  // Partners of released trackers leave the occlusion.
  for (Track& t : trackers) {
    if (!t.occlusion_partner) continue;
    const bool alive = std::any_of(trackers.begin(), trackers.end(), [&](const Track& o) {
      return !o.is_free() && o.id == *t.occlusion_partner;
    });
    if (!alive) clear_occlusion(t);
  }
}

TrackSnapshot interpolate_snapshot(std::span<const TrackSnapshot> history, std::uint64_t t) {
  if (history.empty() || t < history.front().t || t > history.back().t) {
    throw Error(Errc::out_of_range, "t=" + std::to_string(t) + " outside the track span");
  }
  // First snapshot strictly after t.
  auto it = std::upper_bound(history.begin(), history.end(), t,
                             [](std::uint64_t v, const TrackSnapshot& s) { return v < s.t; });
  if (it == history.end()) return history.back();
  if (it == history.begin()) return history.front();
  const TrackSnapshot& lo = *(it - 1);
  const TrackSnapshot& hi = *it;
  const double lambda = static_cast<double>(t - lo.t) / static_cast<double>(hi.t - lo.t);
  auto lerp = [lambda](double a, double b) { return a + lambda * (b - a); };
  TrackSnapshot out = lo;
  out.t = t;
  out.box = BoxF{lerp(lo.box.x, hi.box.x), lerp(lo.box.y, hi.box.y), lerp(lo.box.w, hi.box.w),
                 lerp(lo.box.h, hi.box.h)};
  out.vx = lerp(lo.vx, hi.vx);
  out.vy = lerp(lo.vy, hi.vy);
  return out;
}

BoxF interpolate(std::span<const TrackSnapshot> history, std::uint64_t t) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].t <= history[i - 1].t) {
      throw Error(Errc::out_of_range, "track history timestamps must be strictly increasing");
    }
  }
  return interpolate_snapshot(history, t).box;
}

EotTracker::EotTracker(SensorGeometry geometry, EotConfig cfg, std::uint64_t frame_period_us)
    : geometry_(geometry), cfg_(cfg), period_us_(frame_period_us) {
  cfg_.validate();
  if (period_us_ == 0) throw Error(Errc::invalid_config, "frame period must be > 0");
  tracks_.resize(static_cast<std::size_t>(cfg_.max_trackers));
}

std::size_t EotTracker::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(tracks_.begin(), tracks_.end(), [](const Track& t) { return !t.is_free(); }));
}

std::vector<TrackSnapshot> EotTracker::step(std::span<const RegionProposal> proposals, std::uint64_t t) {
  const std::size_t nt = tracks_.size();
  const AssignmentPlan plan = assign_proposals(tracks_, proposals, t, cfg_);
  std::vector<bool> matched(nt, false);
  std::vector<bool> occluded(nt, false);

  auto owned_box = [&](std::size_t i) {
    std::vector<BoxF> group;
    for (std::size_t j : plan.owned[i]) group.push_back(proposals[j].box);
    return group;
  };

  for (const auto& g : plan.shared) {
    if (g.trackers.size() != 2) {
      if (log_) {
        *log_ << "t=" << t << ": " << g.trackers.size()
              << " trackers share one proposal; kept as a single merged track\n";
      }
      continue;
    }
    Track& a = tracks_[g.trackers[0]];
    Track& b = tracks_[g.trackers[1]];
    const bool partners = a.occlusion_partner == b.id && b.occlusion_partner == a.id;
    const bool fresh = !a.occlusion_partner && !b.occlusion_partner;
    if (!partners && !(fresh && will_collide(a, b, t, period_us_))) continue;

    BoxF shared = proposals[g.proposal].box;
    for (const BoxF& extra : owned_box(g.trackers[0])) shared = union_box(shared, extra);

    double previous_width = a.shared_width;
    if (!partners) {
      a.pre_occlusion_size = Extent{a.box.w, a.box.h};
      b.pre_occlusion_size = Extent{b.box.w, b.box.h};
      a.occlusion_partner = b.id;
      b.occlusion_partner = a.id;
      previous_width = union_box(a.box, b.box).w;
      if (log_) *log_ << "t=" << t << ": occlusion onset " << a.id << "/" << b.id << "\n";
    }
    const OcclusionContext ctx = occlusion_context(a, b, shared, previous_width);
    const auto [box_a, box_b] = resolve_occlusion(a, b, shared, ctx);
    for (auto [track, box] : {std::pair{&a, box_a}, std::pair{&b, box_b}}) {
      track->box = box;
      track->shared_width = shared.w;
      track->t_last = t;
      track->unlock_count = 0;
      promote(*track);
    }
    matched[g.trackers[0]] = matched[g.trackers[1]] = true;
    occluded[g.trackers[0]] = occluded[g.trackers[1]] = true;
  }

  for (std::size_t i = 0; i < nt; ++i) {
    if (occluded[i] || plan.owned[i].empty()) continue;
    Track& tr = tracks_[i];
    const auto group = owned_box(i);
    const BoxF r = merge_shared_proposals(group, predict_box(tr, t));
    tr = update_track(tr, r, t, cfg_);
    matched[i] = true;
  }

  for (std::size_t i = 0; i < nt; ++i) {
    if (!occluded[i] && tracks_[i].occlusion_partner) {
      if (log_) *log_ << "t=" << t << ": occlusion end for " << tracks_[i].id << "\n";
      clear_occlusion(tracks_[i]);
    }
  }

  for (const auto& s : plan.spawn) {
    Track& tr = tracks_[s.slot];
    tr = Track{};
    tr.id = next_id_++;
    tr.box = proposals[s.proposal].box;
    tr.state = TrackState::tracking;
    tr.t_last = t;
    matched[s.slot] = true;
  }
  if (log_ && !plan.dropped.empty()) {
    *log_ << "t=" << t << ": " << plan.dropped.size() << " proposals dropped, no free tracker\n";
  }

  cleanup(tracks_, matched, geometry_, cfg_, period_us_);

  std::vector<TrackSnapshot> out;
  for (std::size_t i = 0; i < nt; ++i) {
    const Track& tr = tracks_[i];
    if (tr.is_free()) continue;
    // Coasting trackers report their predicted position.
    const BoxF box = matched[i] ? tr.box : predict_box(tr, t);
    out.push_back(TrackSnapshot{tr.id, t, box, tr.state, tr.vx, tr.vy});
  }
  return out;
}

}  // namespace evtrack
