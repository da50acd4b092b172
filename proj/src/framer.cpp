#include "evtrack/framer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evtrack/error.hpp"

namespace evtrack {

void FramerConfig::validate() const {
  if (frame_period_us == 0) throw Error(Errc::invalid_config, "framer.frame_period_us must be > 0");
  if (median_kernel < 1 || median_kernel % 2 == 0) {
    throw Error(Errc::invalid_config, "framer.median_kernel must be odd and >= 1");
  }
  if (hist_threshold < 1) throw Error(Errc::invalid_config, "framer.hist_threshold must be >= 1");
  if (min_box_side < 1) throw Error(Errc::invalid_config, "framer.min_box_side must be >= 1");
  if (!(min_density >= 0.0 && min_density <= 1.0)) {
    throw Error(Errc::invalid_config, "framer.min_density must be in [0, 1]");
  }
}

BinaryFrame::BinaryFrame(SensorGeometry geometry, std::uint64_t t_start, std::uint64_t t_end)
    : geometry_(geometry),
      t_start_(t_start),
      t_end_(t_end),
      pixels_(static_cast<std::size_t>(geometry.width) * geometry.height, 0) {}

std::size_t BinaryFrame::count() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), std::uint8_t{1}));
}

BinaryFrame accumulate_frame(std::span<const Event> events, SensorGeometry geometry,
                             std::uint64_t t_start, std::uint64_t t_end) {
  BinaryFrame frame(geometry, t_start, t_end);
  for (const Event& e : events) frame.set(e.x, e.y);
  return frame;
}

namespace {

// (w+1) x (h+1) summed-area table over the set pixels.
std::vector<std::uint32_t> integral_image(const BinaryFrame& frame) {
  const std::uint32_t w = frame.geometry().width;
  const std::uint32_t h = frame.geometry().height;
  std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto px = frame.pixels();
  for (std::uint32_t y = 0; y < h; ++y) {
    std::uint32_t row = 0;
    for (std::uint32_t x = 0; x < w; ++x) {
      row += px[static_cast<std::size_t>(y) * w + x];
      sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
          sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  return sat;
}

struct Rect {
  std::uint32_t x0, y0, x1, y1;  // half-open
};

std::uint32_t rect_sum(const std::vector<std::uint32_t>& sat, std::uint32_t stride, const Rect& r) {
  auto at = [&](std::uint32_t x, std::uint32_t y) { return sat[static_cast<std::size_t>(y) * stride + x]; };
  return at(r.x1, r.y1) + at(r.x0, r.y0) - at(r.x0, r.y1) - at(r.x1, r.y0);
}

}  // namespace

BinaryFrame median_filter(const BinaryFrame& frame, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw Error(Errc::invalid_config, "median kernel must be odd and >= 1");
  if (kernel == 1) return frame;
  const std::uint32_t w = frame.geometry().width;
  const std::uint32_t h = frame.geometry().height;
  const auto sat = integral_image(frame);
  const auto r = static_cast<std::int64_t>(kernel / 2);
  const std::uint32_t majority = static_cast<std::uint32_t>(kernel * kernel / 2 + 1);

  BinaryFrame out(frame.geometry(), frame.t_start(), frame.t_end());
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      // Out-of-frame neighbours are zeros, so clipping the window is enough.
      const Rect win{static_cast<std::uint32_t>(std::max<std::int64_t>(0, x - r)),
                     static_cast<std::uint32_t>(std::max<std::int64_t>(0, y - r)),
                     static_cast<std::uint32_t>(std::min<std::int64_t>(w, x + r + 1)),
                     static_cast<std::uint32_t>(std::min<std::int64_t>(h, y + r + 1))};
      if (rect_sum(sat, w + 1, win) >= majority) out.set(x, y);
    }
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> threshold_runs(std::span<const std::uint32_t> hist,
                                                                    int threshold) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
  const auto th = static_cast<std::uint32_t>(std::max(threshold, 0));
  std::size_t i = 0;
  while (i < hist.size()) {
    if (hist[i] >= th && hist[i] > 0) {
      std::size_t j = i;
      while (j < hist.size() && hist[j] >= th && hist[j] > 0) ++j;
      runs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      i = j;
    } else {
      ++i;
    }
  }
  return runs;
}

std::vector<RegionProposal> extract_proposals(const BinaryFrame& frame, const FramerConfig& cfg) {
  const std::uint32_t w = frame.geometry().width;
  const std::uint32_t h = frame.geometry().height;
  auto px = frame.pixels();

  std::vector<std::uint32_t> hx(w, 0), hy(h, 0);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint8_t v = px[static_cast<std::size_t>(y) * w + x];
      hx[x] += v;
      hy[y] += v;
    }
  }
  const auto xruns = threshold_runs(hx, cfg.hist_threshold);
  const auto yruns = threshold_runs(hy, cfg.hist_threshold);
  if (xruns.empty() || yruns.empty()) return {};

  const auto sat = integral_image(frame);
  std::vector<RegionProposal> out;
  std::vector<std::uint32_t> lx, ly;
  for (const auto& [y0, y1] : yruns) {
    for (const auto& [x0, x1] : xruns) {
      Rect cand{x0, y0, x1, y1};

      // Tighten to the local projection runs inside the candidate.
      lx.assign(x1 - x0, 0);
      ly.assign(y1 - y0, 0);
      for (std::uint32_t y = y0; y < y1; ++y) {
        for (std::uint32_t x = x0; x < x1; ++x) {
          const std::uint8_t v = px[static_cast<std::size_t>(y) * w + x];
          lx[x - x0] += v;
          ly[y - y0] += v;
        }
      }
      const auto lxr = threshold_runs(lx, cfg.hist_threshold);
      const auto lyr = threshold_runs(ly, cfg.hist_threshold);
      if (!lxr.empty() && !lyr.empty()) {
        cand = Rect{x0 + lxr.front().first, y0 + lyr.front().first, x0 + lxr.back().second,
                    y0 + lyr.back().second};
      }

      const std::uint32_t bw = cand.x1 - cand.x0;
      const std::uint32_t bh = cand.y1 - cand.y0;
      if (bw < static_cast<std::uint32_t>(cfg.min_box_side) || bh < static_cast<std::uint32_t>(cfg.min_box_side)) {
        continue;
      }
      const double needed = std::ceil(cfg.min_density * static_cast<double>(bw) * static_cast<double>(bh));
      const std::uint32_t set = rect_sum(sat, w + 1, cand);
      if (set == 0 || static_cast<double>(set) < needed) continue;
      out.push_back(RegionProposal{BoxF{static_cast<double>(cand.x0), static_cast<double>(cand.y0),
                                        static_cast<double>(bw), static_cast<double>(bh)},
                                   frame.t_end()});
    }
  }
  std::sort(out.begin(), out.end(), [](const RegionProposal& a, const RegionProposal& b) {
    return a.box.y != b.box.y ? a.box.y < b.box.y : a.box.x < b.box.x;
  });
  return out;
}

std::vector<FrameWindow> partition_frames(std::span<const Event> events, std::uint64_t period_us,
                                          std::uint64_t min_end_us) {
  if (period_us == 0) throw Error(Errc::invalid_config, "frame period must be > 0");
  std::uint64_t n_frames = (min_end_us + period_us - 1) / period_us;
  if (!events.empty()) n_frames = std::max(n_frames, events.back().t / period_us + 1);

  std::vector<FrameWindow> frames;
  frames.reserve(n_frames);
  std::size_t idx = 0;
  for (std::uint64_t k = 0; k < n_frames; ++k) {
    FrameWindow fw{k * period_us, (k + 1) * period_us, idx, idx};
    while (idx < events.size() && events[idx].t < fw.t_end) ++idx;
    fw.end = idx;
    frames.push_back(fw);
  }
  return frames;
}

void write_pgm(const BinaryFrame& frame, std::ostream& out) {
  out << "P5\n" << frame.geometry().width << ' ' << frame.geometry().height << "\n255\n";
  std::vector<char> row(frame.geometry().width);
  auto px = frame.pixels();
  for (std::uint32_t y = 0; y < frame.geometry().height; ++y) {
    for (std::uint32_t x = 0; x < frame.geometry().width; ++x) {
      row[x] = px[static_cast<std::size_t>(y) * frame.geometry().width + x] ? static_cast<char>(255) : 0;
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace evtrack
