#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "evtrack/types.hpp"

namespace evtrack {

struct FramerConfig {
  std::uint64_t frame_period_us = 66000;
  int median_kernel = 3;
  int hist_threshold = 2;   // minimum set pixels per column/row to extend a run
  int min_box_side = 3;
  double min_density = 0.05;  // fraction of set pixels required inside a proposal

  // Throws Error(invalid_config) on violated invariants.
  void validate() const;
};

/// 1-bit activity image over the window [t_start, t_end).
class BinaryFrame {
 public:
  BinaryFrame() = default;
  BinaryFrame(SensorGeometry geometry, std::uint64_t t_start, std::uint64_t t_end);

  const SensorGeometry& geometry() const { return geometry_; }
  std::uint64_t t_start() const { return t_start_; }
  std::uint64_t t_end() const { return t_end_; }

  bool at(std::uint32_t x, std::uint32_t y) const { return pixels_[index(x, y)] != 0; }
  void set(std::uint32_t x, std::uint32_t y, bool v = true) { pixels_[index(x, y)] = v ? 1 : 0; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::size_t count() const;

  friend bool operator==(const BinaryFrame&, const BinaryFrame&) = default;

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y) const {
    return static_cast<std::size_t>(y) * geometry_.width + x;
  }

  SensorGeometry geometry_{};
  std::uint64_t t_start_ = 0;
  std::uint64_t t_end_ = 0;
  std::vector<std::uint8_t> pixels_;
};

struct RegionProposal {
  BoxF box;
  std::uint64_t t = 0;  // frame end time

  friend bool operator==(const RegionProposal&, const RegionProposal&) = default;
};

/// Sets every pixel hit by at least one event; polarity is ignored.
BinaryFrame accumulate_frame(std::span<const Event> events, SensorGeometry geometry,
                             std::uint64_t t_start, std::uint64_t t_end);

/// k x k majority filter with zero padding at the borders.
BinaryFrame median_filter(const BinaryFrame& frame, int kernel);

/// Region proposals from the column and row projection histograms, sorted by
/// (y, x) of the top-left corner.
std::vector<RegionProposal> extract_proposals(const BinaryFrame& frame, const FramerConfig& cfg);

/// Maximal runs [begin, end) where hist[i] >= threshold.
std::vector<std::pair<std::uint32_t, std::uint32_t>> threshold_runs(std::span<const std::uint32_t> hist,
                                                                    int threshold);

/// Back-to-back windows [k*period, (k+1)*period) covering every event of the
/// stream. Returns, per window, the half-open index range into `events`.
struct FrameWindow {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<FrameWindow> partition_frames(std::span<const Event> events, std::uint64_t period_us,
                                          std::uint64_t min_end_us = 0);

/// Binary PGM (P5), set pixels written as 255.
void write_pgm(const BinaryFrame& frame, std::ostream& out);

}  // namespace evtrack
