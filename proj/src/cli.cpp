#include "evtrack/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evtrack/config.hpp"
#include "evtrack/error.hpp"
#include "evtrack/eot.hpp"
#include "evtrack/evaluation.hpp"
#include "evtrack/event_io.hpp"
#include "evtrack/pipeline.hpp"
#include "evtrack/synth.hpp"
#include "evtrack/text.hpp"

namespace evtrack::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes through `write` to the named file, or to `out` when no path is given.
void emit(const std::optional<std::string>& path, std::ostream& out,
          const std::function<void(std::ostream&)>& write) {
  if (path) {
    auto f = text::open_out(*path);
    write(f);
    f.flush();
    if (!f) throw Error(Errc::io_failure, "write to " + *path + " failed");
  } else {
    write(out);
  }
}

// CSV events carry no geometry; without one the bounding extent of the events
// is used.
EventStream load_events(const std::string& path, std::optional<SensorGeometry> geometry, std::ostream& err) {
  const EventFormat format = format_from_path(path);
  if (format == EventFormat::binary || geometry) return read_events_file(path, format, geometry);
  EventStream wide = read_events_file(path, format, SensorGeometry{65535, 65535});
  SensorGeometry g{1, 1};
  for (const Event& e : wide.events()) {
    g.width = std::max<std::uint32_t>(g.width, e.x + 1u);
    g.height = std::max<std::uint32_t>(g.height, e.y + 1u);
  }
  err << "note: no sensor geometry given, using the event extent " << g.width << "x" << g.height << '\n';
  return EventStream(g, std::vector<Event>(wide.events().begin(), wide.events().end()));
}

std::optional<SensorGeometry> geometry_option(std::uint32_t width, std::uint32_t height,
                                              const std::optional<SensorGeometry>& fallback) {
  if (width == 0 && height == 0) return fallback;
  if (width == 0 || height == 0) throw UsageError("--width and --height must be given together");
  return SensorGeometry{width, height};
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

std::string require(const std::string& arg, const std::optional<std::string>& from_config, const char* what) {
  if (!arg.empty()) return arg;
  if (from_config) return *from_config;
  throw UsageError(std::string("missing ") + what);
}

std::optional<std::string> optional_path(const std::string& arg, const std::optional<std::string>& from_config) {
  if (!arg.empty()) return arg;
  return from_config;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-object tracking for event cameras"};
  app.name("evtrack");
  app.require_subcommand(0, 1);

  bool print_default_config = false;
  app.add_flag("--print-default-config", print_default_config, "Print the default JSON configuration and exit");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert events between CSV and EVS0 binary");
  std::string conv_in, conv_out;
  std::uint32_t conv_w = 0, conv_h = 0;
  convert->add_option("input", conv_in, "Input events (.csv or binary)")->required();
  convert->add_option("-o,--output", conv_out, "Output events (.csv or binary)")->required();
  convert->add_option("--width", conv_w, "Sensor width for CSV input");
  convert->add_option("--height", conv_h, "Sensor height for CSV input");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  std::string synth_spec, synth_scene, synth_out, synth_gt;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("spec", synth_spec, "Scene description (JSON)");
  synth->add_option("--scene", synth_scene, "Standard scene name (S1..S6) instead of a spec file");
  synth->add_option("-o,--output", synth_out, "Output events")->required();
  synth->add_option("--gt", synth_gt, "Ground-truth CSV output");
  synth->add_option("--seed", synth_seed, "Override the scene seed");

  // track
  auto* track = app.add_subcommand("track", "Run a tracker over an event stream");
  std::string track_algo, track_config, track_in, track_out;
  std::optional<std::uint64_t> track_seed, track_until;
  std::uint32_t track_w = 0, track_h = 0;
  bool track_verbose = false;
  track->add_option("--algo", track_algo, "Tracker")->required()->check(CLI::IsMember({"eot", "ceot"}));
  track->add_option("--config", track_config, "Run configuration (JSON)");
  track->add_option("input", track_in, "Input events");
  track->add_option("-o,--output", track_out, "Output tracks CSV");
  track->add_option("--seed", track_seed, "Override ceot.rng_seed");
  track->add_option("--until", track_until, "Keep emitting frames/ticks up to this time (us)");
  track->add_option("--width", track_w, "Sensor width for CSV input");
  track->add_option("--height", track_h, "Sensor height for CSV input");
  track->add_flag("-v,--verbose", track_verbose, "Per-frame / per-tick progress on stderr");

  // eval
  auto* eval = app.add_subcommand("eval", "Score tracks against ground truth");
  std::string eval_tracks, eval_gt, eval_out, eval_config;
  std::optional<std::uint64_t> eval_period;
  bool eval_tracking = false;
  eval->add_option("tracks", eval_tracks, "Tracks CSV");
  eval->add_option("gt", eval_gt, "Ground-truth CSV");
  eval->add_option("-o,--output", eval_out, "Report CSV");
  eval->add_option("--config", eval_config, "Run configuration (JSON)");
  eval->add_option("--period", eval_period, "Also evaluate at multiples of this period (us)");
  eval->add_flag("--include-tracking", eval_tracking, "Count tracking-state boxes as predictions");

  // interp
  auto* interp = app.add_subcommand("interp", "Interpolate every track at one time");
  std::string interp_in, interp_out;
  std::uint64_t interp_t = 0;
  interp->add_option("tracks", interp_in, "Tracks CSV")->required();
  interp->add_option("--t", interp_t, "Time (us)")->required();
  interp->add_option("-o,--output", interp_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (print_default_config) {
      out << default_config_text();
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      err << app.help();
      return kExitUsage;
    }

    if (convert->parsed()) {
      const EventStream s = load_events(conv_in, geometry_option(conv_w, conv_h, std::nullopt), err);
      write_events_file(s, conv_out, format_from_path(conv_out));
      return kExitOk;
    }

    if (synth->parsed()) {
      if (synth_spec.empty() == synth_scene.empty()) throw UsageError("give exactly one of <spec> and --scene");
      SceneSpec spec;
      if (!synth_scene.empty()) {
        spec = standard_scene(synth_scene);
      } else {
        auto in = text::open_in(synth_spec);
        std::stringstream buf;
        buf << in.rdbuf();
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(Errc::invalid_spec, synth_spec + ": " + e.what());
        }
        spec = scene_from_json(j);
      }
      if (synth_seed) spec.rng_seed = *synth_seed;
      const Scene scene = generate(spec);
      write_events_file(scene.stream, synth_out, format_from_path(synth_out));
      if (!synth_gt.empty()) write_ground_truth_file(scene.ground_truth, synth_gt);
      return kExitOk;
    }

    if (track->parsed()) {
      RunConfig cfg = config_or_default(track_config);
      if (track_seed) cfg.ceot.rng_seed = *track_seed;
      const std::string in_path = require(track_in, cfg.paths.events, "input events");
      const EventStream stream = load_events(in_path, geometry_option(track_w, track_h, cfg.sensor), err);
      const std::uint64_t until = track_until.value_or(0);
      std::vector<TrackSnapshot> tracks;
      if (track_algo == "eot") {
        EotRunOptions opts;
        opts.min_end_us = until;
        if (track_verbose) {
          opts.log = &err;
          opts.on_frame = [&err](const FrameResult& f) {
            err << "frame t=" << f.window.t_end << " events=" << (f.window.end - f.window.begin)
                << " proposals=" << f.proposals.size() << " tracks=" << f.snapshots.size() << '\n';
          };
        }
        tracks = run_eot(stream, cfg.framer, cfg.eot, opts);
      } else {
        CeotRunOptions opts;
        opts.min_end_us = until;
        if (track_verbose) {
          opts.log = &err;
          opts.on_tick = [&err](const CeotTracker& t, std::uint64_t tick) {
            err << "tick t=" << tick << " active=" << t.active_count() << '\n';
          };
        }
        tracks = run_ceot(stream, cfg.ceot, opts);
      }
      emit(optional_path(track_out, cfg.paths.tracks), out,
           [&tracks](std::ostream& o) { write_tracks(tracks, o); });
      return kExitOk;
    }

    if (eval->parsed()) {
      RunConfig cfg = config_or_default(eval_config);
      EvalOptions opts = cfg.eval;
      if (eval_tracking) opts.include_tracking = true;
      if (eval_period) opts.frame_period_us = *eval_period;
      const auto tracks = read_tracks_file(require(eval_tracks, cfg.paths.tracks, "tracks CSV"));
      const auto gt = read_ground_truth_file(require(eval_gt, cfg.paths.ground_truth, "ground-truth CSV"));
      const EvalReport report = pr_sweep(tracks, gt, opts);
      emit(optional_path(eval_out, cfg.paths.report), out,
           [&report](std::ostream& o) { write_report_csv(report, o); });
      write_report_table(report, err);
      return kExitOk;
    }

    if (interp->parsed()) {
      const auto tracks = read_tracks_file(interp_in);
      std::map<std::int64_t, std::vector<TrackSnapshot>> by_id;
      for (const TrackSnapshot& s : tracks) by_id[s.id].push_back(s);
      std::vector<TrackSnapshot> rows;
      for (auto& [id, h] : by_id) {
        std::stable_sort(h.begin(), h.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
        if (interp_t < h.front().t || interp_t > h.back().t) continue;
        rows.push_back(interpolate_snapshot(h, interp_t));
      }
      if (rows.empty()) err << "no track spans t=" << interp_t << '\n';
      emit(interp_out.empty() ? std::nullopt : std::optional<std::string>(interp_out), out,
           [&rows](std::ostream& o) { write_tracks(rows, o); });
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_input_error() ? kExitInput : kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace evtrack::cli
