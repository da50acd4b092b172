// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evtrack/ceot.hpp"
#include "evtrack/cli.hpp"
#include "evtrack/eot.hpp"
#include "evtrack/evaluation.hpp"
#include "evtrack/event_io.hpp"
#include "evtrack/pipeline.hpp"
#include "evtrack/synth.hpp"
#include "support.hpp"

using namespace evtrack;

namespace {

// Pinned tolerances.
constexpr double kIouOracleTol = 1e-12;
constexpr double kOverlapOracleSeconds = 5.0;
constexpr double kS1TrackIou = 0.5;
constexpr double kS1FrameFraction = 0.95;
constexpr double kS1VelocityTol = 0.20;
constexpr int kS1VelocityAfterFrames = 10;
constexpr double kSwapIou = 0.5;
constexpr double kDetectTheta = 0.3;
constexpr double kInterpTol = 1e-12;
constexpr std::uint64_t kMergeTicks = 4;
constexpr double kThroughputSeconds = 10.0;
constexpr double kScalingLimit = 12.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Report {
  std::ostringstream notes;
  bool pass = true;

  void fail(const std::string& why) {
    if (pass) notes << why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<TrackSnapshot> eot_on(const SceneSpec& spec, const EotConfig& cfg = {},
                                  std::function<void(const FrameResult&)> on_frame = {}) {
  const Scene scene = generate(spec);
  EotRunOptions opts;
  opts.min_end_us = spec.duration_us;
  opts.on_frame = std::move(on_frame);
  return run_eot(scene.stream, FramerConfig{}, cfg, opts);
}

std::optional<BoxF> gt_box(const SceneSpec& spec, std::size_t k, std::uint64_t t) {
  const SceneObject& o = spec.objects[k];
  if (t < o.appear_t || t > o.disappear_t.value_or(spec.duration_us)) return std::nullopt;
  return clip_to_geometry(object_box_at(o, t), spec.geometry);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// 1. overlap / IoU against unit-pixel counting.
Outcome overlap_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pos(-50, 150), ext(0, 60);
  std::size_t overlap_bad = 0, iou_bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const int ax = pos(rng), ay = pos(rng), aw = ext(rng), ah = ext(rng);
    const int bx = pos(rng), by = pos(rng), bw = ext(rng), bh = ext(rng);
    const BoxF a{double(ax), double(ay), double(aw), double(ah)};
    const BoxF b{double(bx), double(by), double(bw), double(bh)};
    const long inter = evtest::pixel_intersection(ax, ay, aw, ah, bx, by, bw, bh);
    if (overlap_area(a, b) != double(inter)) ++overlap_bad;
    const long uni = long(aw) * ah + long(bw) * bh - inter;
    const double expected = uni > 0 ? double(inter) / double(uni) : 0.0;
    if (std::abs(iou(a, b) - expected) > kIouOracleTol) ++iou_bad;
  }
  const double s = seconds_since(t0);
  return {overlap_bad == 0 && iou_bad == 0 && s < kOverlapOracleSeconds,
          "10000 pairs, overlap mismatches " + std::to_string(overlap_bad) + ", iou mismatches " +
              std::to_string(iou_bad) + ", " + fmt(s) + " s"};
}

// 2. EOT on S1.
Outcome eot_s1() {
  const SceneSpec spec = standard_scene("S1");
  EotConfig cfg;
  cfg.velocity_position_only = true;
  const std::uint64_t period = FramerConfig{}.frame_period_us;
  const auto snaps = eot_on(spec, cfg);
  Report r;

  std::optional<std::uint64_t> lock_t;
  std::int64_t id = 0;
  for (const auto& s : snaps) {
    if (s.state == TrackState::locked) {
      lock_t = s.t;
      id = s.id;
      break;
    }
  }
  if (!lock_t) return {false, "never locked"};
  const std::uint64_t lock_frame = *lock_t / period;
  if (lock_frame > 2) r.fail("locked at frame " + std::to_string(lock_frame) + "; ");

  std::map<std::uint64_t, TrackSnapshot> by_t;
  for (const auto& s : snaps) {
    if (s.id == id && s.state == TrackState::locked) by_t[s.t] = s;
  }
  std::size_t frames = 0, good = 0, vel_checked = 0, vel_bad = 0;
  const double v_true = std::hypot(spec.objects[0].vx, spec.objects[0].vy);
  for (std::uint64_t f = lock_frame + 1; f * period <= spec.duration_us; ++f) {
    const std::uint64_t t = f * period;
    ++frames;
    const auto it = by_t.find(t);
    if (it == by_t.end()) continue;
    const auto gt = gt_box(spec, 0, t);
    if (gt && iou(it->second.box, *gt) >= kS1TrackIou) ++good;
    if (f >= static_cast<std::uint64_t>(kS1VelocityAfterFrames)) {
      ++vel_checked;
      const double err = std::hypot(it->second.vx - spec.objects[0].vx, it->second.vy - spec.objects[0].vy);
      if (err > kS1VelocityTol * v_true) ++vel_bad;
    }
  }
  const double frac = frames ? double(good) / double(frames) : 0.0;
  if (frac < kS1FrameFraction) r.fail("IoU fraction too low; ");
  if (vel_checked == 0 || vel_bad > 0) r.fail("velocity off; ");
  return {r.pass, r.notes.str() + "locked at frame " + std::to_string(lock_frame) + ", " + std::to_string(good) +
                      "/" + std::to_string(frames) + " frames IoU>=0.5, velocity within 20% on " +
                      std::to_string(vel_checked - vel_bad) + "/" + std::to_string(vel_checked) + " frames"};
}

// 3 / 4. Identity through a crossing: the object each id follows before the
// ground-truth boxes first touch must be the one it follows once they are
// apart again.
Outcome no_swap(const std::string& scene) {
  const SceneSpec spec = standard_scene(scene);
  const auto snaps = eot_on(spec);
  const Scene sc = generate(spec);
  Report r;

  std::uint64_t touch = 0, apart = 0;
  for (std::uint64_t t = 0; t <= spec.duration_us; t += kGroundTruthCadenceUs) {
    const auto a = gt_box(spec, 0, t), b = gt_box(spec, 1, t);
    if (!a || !b) continue;
    const bool overlap = overlap_area(*a, *b) > 0;
    if (overlap && touch == 0) touch = t;
    if (overlap) apart = t + kGroundTruthCadenceUs;
  }
  if (touch == 0) return {false, "objects never overlap"};

  // Owner before the crossing: best IoU on the last locked snapshot before touch.
  std::map<std::int64_t, std::pair<std::uint64_t, std::size_t>> owner;
  for (const auto& s : snaps) {
    if (s.state != TrackState::locked || s.t >= touch) continue;
    std::size_t best = 0;
    double best_iou = -1;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto g = gt_box(spec, k, s.t);
      const double v = g ? iou(s.box, *g) : 0.0;
      if (v > best_iou) {
        best_iou = v;
        best = k;
      }
    }
    if (best_iou >= kSwapIou) owner[s.id] = {s.t, best};
  }
  std::set<std::size_t> owned;
  for (const auto& [id, o] : owner) owned.insert(o.second);
  if (owned.size() != 2) return {false, "both objects not tracked before the crossing"};

  std::map<std::int64_t, std::size_t> after_ok, after_n;
  for (const auto& s : snaps) {
    if (s.state != TrackState::locked || s.t < apart || !owner.count(s.id)) continue;
    const auto g = gt_box(spec, owner[s.id].second, s.t);
    if (!g) continue;  // past the annotated span
    ++after_n[s.id];
    if (iou(s.box, *g) >= kSwapIou) ++after_ok[s.id];
  }
  std::ostringstream d;
  for (const auto& [id, o] : owner) {
    d << "id " << id << " -> object " << o.second + 1 << ": " << after_ok[id] << "/" << after_n[id]
      << " post-separation frames IoU>=0.5; ";
    if (after_n[id] == 0) r.fail("id " + std::to_string(id) + " lost; ");
    if (after_ok[id] != after_n[id]) r.fail("id " + std::to_string(id) + " drifted or swapped; ");
  }
  const double dp = detection_probability(snaps, sc.ground_truth, kDetectTheta);
  if (dp != 1.0) r.fail("detection probability " + fmt(dp) + "; ");
  d << "detection probability " << fmt(dp) << " at theta 0.3";
  return {r.pass, r.notes.str() + d.str()};
}

// 5. Interpolation.
Outcome interpolation() {
  const auto snaps = eot_on(standard_scene("S1"));
  std::map<std::int64_t, std::vector<TrackSnapshot>> hist;
  for (const auto& s : snaps) hist[s.id].push_back(s);
  std::size_t stored_bad = 0, mid_bad = 0, lambda_bad = 0, spans = 0;
  for (const auto& [id, h] : hist) {
    for (const auto& s : h) {
      const BoxF b = interpolate(h, s.t);
      if (std::abs(b.x - s.box.x) > kInterpTol || std::abs(b.y - s.box.y) > kInterpTol ||
          std::abs(b.w - s.box.w) > kInterpTol || std::abs(b.h - s.box.h) > kInterpTol) {
        ++stored_bad;
      }
    }
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
      const TrackSnapshot& a = h[k];
      const TrackSnapshot& b = h[k + 1];
      if ((b.t - a.t) % 2 == 0) {
        const BoxF m = interpolate(h, a.t + (b.t - a.t) / 2);
        const BoxF mean{(a.box.x + b.box.x) / 2, (a.box.y + b.box.y) / 2, (a.box.w + b.box.w) / 2,
                        (a.box.h + b.box.h) / 2};
        if (std::abs(m.x - mean.x) > kInterpTol || std::abs(m.y - mean.y) > kInterpTol ||
            std::abs(m.w - mean.w) > kInterpTol || std::abs(m.h - mean.h) > kInterpTol) {
          ++mid_bad;
        }
      }
      if (a.box.x == b.box.x) continue;
      ++spans;
      double prev = -1.0;
      for (int q = 0; q <= 20; ++q) {
        const std::uint64_t t = a.t + (b.t - a.t) * q / 20;
        const double lambda = (interpolate(h, t).x - a.box.x) / (b.box.x - a.box.x);
        if (lambda < -kInterpTol || lambda > 1 + kInterpTol || lambda < prev - kInterpTol) ++lambda_bad;
        prev = lambda;
      }
    }
  }
  return {stored_bad == 0 && mid_bad == 0 && lambda_bad == 0 && spans > 0,
          "stored mismatches " + std::to_string(stored_bad) + ", midpoint mismatches " + std::to_string(mid_bad) +
              ", non-monotone lambda samples " + std::to_string(lambda_bad) + " over " + std::to_string(spans) +
              " spans"};
}

// 6. Activity gating.
Outcome ceot_gating() {
  Report r;
  const SceneSpec s1 = standard_scene("S1");
  const Scene sc1 = generate(s1);
  CeotTracker tr(sc1.stream.geometry(), CeotConfig{});
  double worst = 0.0;
  std::size_t ticks = 0, crowded = 0;
  bool seen = false;
  tr.set_on_tick([&](const CeotTracker& t, std::uint64_t now) {
    // Once one tracker is active, every tick shows exactly one.
    if (t.active_count() > 0) seen = true;
    if (seen && t.active_count() != 1) ++crowded;
    for (const CTracker& c : t.pool()) {
      if (!c.active) continue;
      ++ticks;
      const auto g = gt_box(s1, 0, now);
      if (!g) continue;
      const double d = std::max(std::abs(c.x - g->cx()), std::abs(c.y - g->cy())) / std::max(c.dx, c.dy);
      worst = std::max(worst, d);
    }
  });
  tr.push(sc1.stream.events());
  tr.finish(s1.duration_us);
  std::set<std::int64_t> ids;
  for (const auto& s : tr.snapshots()) ids.insert(s.id);
  if (ids.size() != 1) r.fail(std::to_string(ids.size()) + " ids on S1; ");
  if (crowded > 0) r.fail(std::to_string(crowded) + " ticks without exactly one active tracker; ");
  if (worst > 1.0) r.fail("centre left max(dx,dy); ");
  if (ticks == 0) r.fail("no active ticks; ");

  const SceneSpec s4 = standard_scene("S4");
  const ThetaCalibration cal = calibrate_theta_active(CeotConfig{}, s4.geometry);
  CeotConfig cfg;
  cfg.theta_active = cal.theta;
  CeotTracker noise(s4.geometry, cfg);
  noise.push(generate(s4).stream.events());
  noise.finish(s4.duration_us);
  if (noise.counters().activations != 0) r.fail("activation on S4; ");
  return {r.pass, r.notes.str() + "S1: " + std::to_string(ids.size()) + " id, " +
                      std::to_string(ticks) + " ticks with exactly one active tracker (" +
                      std::to_string(tr.counters().activations) +
                      " transient activations between ticks, all merged before emission), worst centre offset " +
                      fmt(worst) + " x max(dx,dy); S4: " +
                      std::to_string(noise.counters().activations) + " activations at calibrated theta " +
                      fmt(cal.theta)};
}

// 7. Merge of two trackers seeded on the same object.
Outcome ceot_merge() {
  const SceneSpec spec = standard_scene("S1");
  const Scene sc = generate(spec);
  const CeotConfig cfg;
  CeotTracker tr(sc.stream.geometry(), cfg);
  const BoxF b = spec.objects[0].box0;
  // Both trackers cover the object, offset to either side of its centre.
  CTracker left;
  left.x = b.cx() - 0.2 * b.w;
  left.y = b.cy();
  left.dx = 0.5 * b.w;
  left.dy = 0.5 * b.h;
  left.active = true;
  left.isi = 200.0;
  CTracker right = left;
  right.x = b.cx() + 0.2 * b.w;
  tr.seed(0, left);
  tr.seed(1, right);
  const std::set<std::int64_t> seeded{tr.pool()[0].id, tr.pool()[1].id};
  tr.push(sc.stream.events());
  const MergeRecord* found = nullptr;
  for (const MergeRecord& m : tr.merges()) {
    if (std::set<std::int64_t>{m.kept_before.id, m.absorbed_before.id} == seeded) {
      found = &m;
      break;
    }
  }
  if (!found) return {false, "seeded trackers never merged"};
  const MergeRecord& m = *found;
  Report r;
  const std::uint64_t ticks = m.t / cfg.cleanup_period_us;
  if (ticks > kMergeTicks) r.fail("merge after " + std::to_string(ticks) + " ticks; ");
  if (!merge_condition(m.kept_before, m.absorbed_before)) r.fail("merge condition false at merge; ");
  if (m.absorbed_after.active) r.fail("absorbed tracker still active; ");
  return {r.pass, r.notes.str() + "merged at tick " + std::to_string(ticks) + " (t=" + std::to_string(m.t) +
                      "), id " + std::to_string(m.kept_before.id) + " absorbed id " + std::to_string(m.absorbed_before.id) +
                      ", absorbed re-initialised " + (m.absorbed_after.active ? "active" : "inactive")};
}

// 8. Occlusion gates and frozen state.
Outcome ceot_occlusion() {
  Report r;
  const CeotConfig cfg;
  CTracker a;
  a.x = 100;
  a.y = 100;
  a.dx = a.dy = 10;
  a.active = true;
  CTracker b = a;
  b.x = 110;
  int trues = 0;
  for (int row = 0; row < 8; ++row) {
    const bool da = row & 1, db = row & 2, pd = row & 4;
    CTrackerMotion ma, mb;
    // Same-sign x velocities differing by 30 px/s set D_alpha; opposite-sign
    // y velocities differing by 20 px/s set D_beta.
    ma.vx = da ? 40 : 10;
    mb.vx = 10;
    ma.vy = db ? 10 : 0;
    mb.vy = db ? -10 : 0;
    ma.cov_xx = mb.cov_xx = pd ? 1.0 : cfg.p_threshold;
    const OcclusionGates g = occlusion_gates(ma, mb, cfg);
    if (g.d_alpha != da || g.d_beta != db || g.p_d != pd) r.fail("gate row " + std::to_string(row) + " mis-set; ");
    const bool got = detect_occlusion(a, ma, b, mb, cfg);
    if (got != (pd && (da || db))) r.fail("row " + std::to_string(row) + " wrong; ");
    trues += got;
  }
  if (trues != 3) r.fail(std::to_string(trues) + " true rows; ");

  const SceneSpec spec = standard_scene("S2");
  const Scene sc = generate(spec);
  CeotTracker tr(sc.stream.geometry(), cfg);
  std::size_t checks = 0, broken = 0;
  auto check = [&](const CeotTracker& t) {
    for (std::size_t i = 0; i < t.pool().size(); ++i) {
      const CTrackerMotion& m = t.motions()[i];
      if (!m.occluding_with) continue;
      ++checks;
      if (!m.frozen_size || !m.frozen_velocity || t.pool()[i].dx != m.frozen_size->first ||
          t.pool()[i].dy != m.frozen_size->second || m.vx != m.frozen_velocity->first ||
          m.vy != m.frozen_velocity->second) {
        ++broken;
      }
    }
  };
  for (const Event& e : sc.stream.events()) {
    tr.push(e);
    check(tr);
  }
  tr.finish(spec.duration_us);
  if (tr.occlusions().empty()) r.fail("no occlusion on S2; ");
  if (broken > 0) r.fail("frozen state changed; ");
  return {r.pass, r.notes.str() + std::to_string(trues) + "/8 rows detect occlusion; S2: " +
                      std::to_string(tr.occlusions().size()) + " occlusion records, " + std::to_string(checks) +
                      " per-event frozen checks, " + std::to_string(broken) + " violations"};
}

// 9. Capacity.
Outcome capacity() {
  const SceneSpec spec = standard_scene("S5");
  std::size_t max_busy = 0, first_full = 0, frames = 0, short_after_full = 0;
  const auto snaps = eot_on(spec, EotConfig{}, [&](const FrameResult& f) {
    ++frames;
    std::size_t busy = 0;
    for (const Track& t : f.tracker.tracks()) busy += t.state != TrackState::free;
    max_busy = std::max(max_busy, busy);
    if (busy == 8 && first_full == 0) first_full = frames;
    if (first_full != 0 && busy != 8) ++short_after_full;
  });
  std::set<std::int64_t> ids;
  for (const auto& s : snaps) ids.insert(s.id);
  const double dp = detection_probability(snaps, generate(spec).ground_truth, kDetectTheta);
  Report r;
  if (max_busy != 8 || first_full == 0) r.fail("max non-free " + std::to_string(max_busy) + "; ");
  if (short_after_full > 0) r.fail("dropped below 8 on " + std::to_string(short_after_full) + " frames; ");
  if (ids.size() != 8) r.fail(std::to_string(ids.size()) + " ids; ");
  if (dp != 1.0) r.fail("detection probability " + fmt(dp) + "; ");
  return {r.pass, r.notes.str() + "8 non-free from frame " + std::to_string(first_full) + " of " +
                      std::to_string(frames) + ", max " + std::to_string(max_busy) + ", " +
                      std::to_string(ids.size()) + " ids, detection probability " + fmt(dp) + " at theta 0.3"};
}

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "evtrack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  return code;
}

// 10. Determinism of every subcommand.
Outcome determinism() {
  evtest::TempDir dir("acceptance");
  std::size_t compared = 0, differ = 0, errors = 0;
  for (const SceneSpec& spec : standard_suite()) {
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      const auto p = [&](const std::string& f) { return (dir / (spec.name + "-" + std::to_string(run) + "-" + f)).string(); };
      std::vector<std::vector<std::string>> cmds = {
          {"synth", "--scene", spec.name, "--seed", "7", "-o", p("events.evs"), "--gt", p("gt.csv")},
          {"convert", p("events.evs"), "-o", p("events.csv")},
          {"track", "--algo", "eot", p("events.evs"), "--until", std::to_string(spec.duration_us), "-o",
           p("eot.csv")},
          {"track", "--algo", "ceot", "--seed", "7", p("events.evs"), "--until",
           std::to_string(spec.duration_us), "-o", p("ceot.csv")},
          {"interp", p("eot.csv"), "--t", std::to_string(spec.duration_us / 2), "-o", p("interp.csv")},
      };
      if (!spec.objects.empty()) {
        cmds.push_back({"eval", p("eot.csv"), p("gt.csv"), "-o", p("eval-eot.csv")});
        cmds.push_back({"eval", p("ceot.csv"), p("gt.csv"), "-o", p("eval-ceot.csv")});
      }
      for (const auto& c : cmds) errors += cli_run(c) != 0;
      std::string cfg;
      errors += cli_run({"--print-default-config"}, &cfg) != 0;
      for (const char* f : {"events.evs", "gt.csv", "events.csv", "eot.csv", "ceot.csv", "interp.csv",
                            "eval-eot.csv", "eval-ceot.csv"}) {
        if (!std::filesystem::exists(p(f))) continue;
        const std::string bytes = evtest::slurp(p(f));
        if (run == 0) {
          first[f] = bytes;
        } else {
          ++compared;
          differ += first[f] != bytes;
        }
      }
      if (run == 0) first["config"] = cfg;
      else {
        ++compared;
        differ += first["config"] != cfg;
      }
    }
  }
  return {differ == 0 && errors == 0 && compared > 0,
          std::to_string(compared) + " output pairs compared over 6 scenes, " + std::to_string(differ) +
              " differ, " + std::to_string(errors) + " failed commands"};
}

// 11. Throughput.
SceneSpec throughput_scene(std::uint64_t duration_us) {
  // About one million events per second: four slow objects plus noise.
  SceneSpec s{"throughput", {640, 480}, duration_us, {}, 220000.0, 7};
  for (double x : {80.0, 400.0}) {
    for (double y : {80.0, 300.0}) s.objects.push_back({BoxF{x, y, 40, 32}, 8.0, 6.0, 200000.0, 0, {}});
  }
  return s;
}

double median_ceot_seconds(const EventStream& stream, int reps) {
  std::vector<double> t;
  for (int k = 0; k < reps; ++k) {
    CeotTracker tr(stream.geometry(), CeotConfig{});
    const auto t0 = Clock::now();
    tr.push(stream.events());
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome throughput() {
  const Scene small = generate(throughput_scene(1'000'000));
  const Scene large = generate(throughput_scene(10'000'000));
  const double ts = median_ceot_seconds(small.stream, 5);
  const double tl = median_ceot_seconds(large.stream, 3);
  const double ratio = tl / ts;
  const bool big_enough = large.stream.size() >= 10'000'000;
  return {big_enough && tl < kThroughputSeconds && ratio <= kScalingLimit,
          std::to_string(small.stream.size()) + " events in " + fmt(ts) + " s, " +
              std::to_string(large.stream.size()) + " events in " + fmt(tl) + " s, ratio " + fmt(ratio)};
}

// 12. Monotone precision and recall.
Outcome monotone_pr() {
  std::size_t sweeps = 0, violations = 0;
  for (const SceneSpec& spec : standard_suite()) {
    const Scene sc = generate(spec);
    if (sc.ground_truth.empty()) continue;  // nothing to score against
    for (int algo = 0; algo < 2; ++algo) {
      const auto snaps = algo == 0 ? eot_on(spec) : run_ceot(sc.stream, CeotConfig{}, {spec.duration_us, {}, nullptr});
      for (bool tracking : {false, true}) {
        EvalOptions opts;
        opts.include_tracking = tracking;
        const EvalReport rep = pr_sweep(snaps, sc.ground_truth, opts);
        ++sweeps;
        for (std::size_t k = 1; k < rep.scores.size(); ++k) {
          violations += rep.scores[k].precision > rep.scores[k - 1].precision;
          violations += rep.scores[k].recall > rep.scores[k - 1].recall;
        }
      }
    }
  }
  return {violations == 0 && sweeps > 0, std::to_string(sweeps) + " sweeps (S4 has no ground truth), " +
                                             std::to_string(violations) + " increases"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"overlap/IoU oracle", overlap_oracle},
      {"EOT S1 lock, IoU and velocity", eot_s1},
      {"EOT S2 crossing without swap", [] { return no_swap("S2"); }},
      {"EOT S3 overtake without swap", [] { return no_swap("S3"); }},
      {"interpolation exactness", interpolation},
      {"C-EOT activity gating", ceot_gating},
      {"C-EOT merge rule", ceot_merge},
      {"C-EOT occlusion gates and frozen state", ceot_occlusion},
      {"EOT capacity on S5", capacity},
      {"determinism of every subcommand", determinism},
      {"C-EOT throughput", throughput},
      {"monotone precision and recall", monotone_pr},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
