#include "evtrack/pipeline.hpp"

#include <cmath>

#include "evtrack/error.hpp"
#include "evtrack/synth.hpp"

namespace evtrack {

std::vector<TrackSnapshot> run_eot(const EventStream& stream, const FramerConfig& framer, const EotConfig& eot,
                                   const EotRunOptions& options) {
  framer.validate();
  EotTracker tracker(stream.geometry(), eot, framer.frame_period_us);
  tracker.set_log(options.log);
  const auto events = stream.events();
  std::vector<TrackSnapshot> out;
  for (const FrameWindow& w : partition_frames(events, framer.frame_period_us, options.min_end_us)) {
    const BinaryFrame raw =
        accumulate_frame(events.subspan(w.begin, w.end - w.begin), stream.geometry(), w.t_start, w.t_end);
    const BinaryFrame filtered = median_filter(raw, framer.median_kernel);
    const std::vector<RegionProposal> proposals = extract_proposals(filtered, framer);
    const std::vector<TrackSnapshot> snaps = tracker.step(proposals, w.t_end);
    if (options.on_frame) options.on_frame(FrameResult{w, filtered, proposals, snaps, tracker});
    out.insert(out.end(), snaps.begin(), snaps.end());
  }
  return out;
}

std::vector<TrackSnapshot> run_ceot(const EventStream& stream, const CeotConfig& cfg, const CeotRunOptions& options) {
  CeotTracker tracker(stream.geometry(), cfg);
  if (options.on_tick) tracker.set_on_tick(options.on_tick);
  tracker.push(stream.events());
  std::uint64_t end = options.min_end_us;
  if (!stream.empty()) end = std::max(end, stream.events().back().t);
  tracker.finish(end);
  if (options.log) {
    const CeotCounters& c = tracker.counters();
    *options.log << "ceot: matched_active=" << c.matched_active << " nearest_inactive=" << c.nearest_inactive
                 << " dropped=" << c.dropped << " activations=" << c.activations
                 << " merges=" << tracker.merges().size() << " occlusion_events=" << tracker.occlusions().size()
                 << '\n';
  }
  return tracker.take_snapshots();
}

namespace {

bool any_activation(const EventStream& stream, const CeotConfig& cfg, std::uint64_t end) {
  CeotTracker tracker(stream.geometry(), cfg);
  tracker.push(stream.events());
  tracker.finish(end);
  return tracker.counters().activations > 0;
}

// Smallest (want_true) or largest (!want_true) theta on a log grid for which
// pred switches; pred is monotone non-decreasing in theta.
template <class Pred>
double bisect_log(double lo, double hi, Pred pred, bool want_true) {
  for (int i = 0; i < 40; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return want_true ? hi : lo;
}

}  // namespace

ThetaCalibration calibrate_theta_active(const CeotConfig& base, SensorGeometry geometry) {
  constexpr std::uint64_t kDuration = 2'000'000;
  SceneSpec object_spec;
  object_spec.name = "calibration-object";
  object_spec.geometry = geometry;
  object_spec.duration_us = kDuration;
  object_spec.rng_seed = base.rng_seed;
  SceneObject obj;
  obj.box0 = BoxF{0.5 * geometry.width - 15.0, 0.5 * geometry.height - 15.0, 30.0, 30.0};
  obj.edge_event_rate = 1000.0;
  object_spec.objects.push_back(obj);

  SceneSpec noise_spec;
  noise_spec.name = "calibration-noise";
  noise_spec.geometry = geometry;
  noise_spec.duration_us = kDuration;
  noise_spec.noise_rate = 100.0;
  noise_spec.rng_seed = base.rng_seed;

  const Scene object_scene = generate(object_spec);
  const Scene noise_scene = generate(noise_spec);
  auto activates = [&](const Scene& scene) {
    return [&scene, &base](double theta) {
      CeotConfig cfg = base;
      cfg.theta_active = theta;
      return any_activation(scene.stream, cfg, kDuration);
    };
  };
  constexpr double kMin = 1e2;
  constexpr double kMax = 1e10;
  ThetaCalibration out;
  out.lo = bisect_log(kMin, kMax, activates(object_scene), true);
  out.hi = bisect_log(kMin, kMax, activates(noise_scene), false);
  if (!(out.lo < out.hi)) {
    throw Error(Errc::invalid_config, "theta_active calibration has no separating value");
  }
  out.theta = std::sqrt(out.lo * out.hi);
  return out;
}

}  // namespace evtrack
