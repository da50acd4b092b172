#pragma once

// Box-level scoring of tracker output against ground truth.
//
// Ground truth is interpolated to each evaluation time. Predictions and
// ground-truth boxes of one time are paired greedily in descending IoU order,
// one-to-one; a pair counts as a true positive at threshold theta when its IoU
// is at least theta. Track identity only matters for detection probability,
// which groups true positives by ground-truth object.
//
// Ground-truth CSV: header "object_id,t_us,x,y,w,h,class", class may be empty.
// Report CSV:       header "theta,precision,recall,f1,detection_prob".

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evtrack/types.hpp"

namespace evtrack {

inline constexpr std::string_view kGroundTruthCsvHeader = "object_id,t_us,x,y,w,h,class";
inline constexpr std::string_view kReportCsvHeader = "theta,precision,recall,f1,detection_prob";

double iou(const BoxF& a, const BoxF& b);

struct MatchedPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0.0;
};

struct FrameMatch {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchedPair> pairs;  // the true positives
};

/// Greedy one-to-one matching; ties in IoU are broken by (pred, gt) index.
FrameMatch match_frame(std::span<const BoxF> pred, std::span<const BoxF> gt, double theta);

/// Pairs chosen by the greedy matching with no threshold, in descending IoU
/// order (zero-IoU pairs excluded). Thresholding this list at theta gives
/// exactly the pairs of match_frame(pred, gt, theta).
std::vector<MatchedPair> greedy_pairs(std::span<const BoxF> pred, std::span<const BoxF> gt);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_thresholds();

struct EvalOptions {
  std::vector<double> thresholds = default_thresholds();
  // Count "tracking" snapshots as predictions, not only "locked" ones.
  bool include_tracking = false;
  // Extra evaluation times at multiples of this period inside the
  // ground-truth span. Without it only prediction timestamps are evaluated.
  std::optional<std::uint64_t> frame_period_us;
};

struct ThresholdScore {
  double theta = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double detection_prob = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

struct ObjectDetection {
  std::int64_t object_id = 0;
  std::vector<bool> detected;  // per threshold, same order as EvalReport::scores
};

struct EvalReport {
  std::vector<ThresholdScore> scores;
  std::vector<ObjectDetection> objects;  // ascending object_id
  std::size_t frames = 0;
  bool include_tracking = false;
};

/// Throws Error(empty_ground_truth) when `gt` is empty and Error(invalid_config)
/// unless thresholds are strictly increasing in (0, 1).
EvalReport pr_sweep(std::span<const TrackSnapshot> pred, std::span<const GroundTruthRecord> gt,
                    const EvalOptions& options = {});

double detection_probability(std::span<const TrackSnapshot> pred, std::span<const GroundTruthRecord> gt,
                             double theta, const EvalOptions& options = {});

/// Ground-truth boxes of every object annotated at time t (linear
/// interpolation between the two bracketing records of each object).
std::vector<std::pair<std::int64_t, BoxF>> ground_truth_at(std::span<const GroundTruthRecord> gt,
                                                           std::uint64_t t);

/// Ground truth replayed as locked predictions, ids = object ids.
std::vector<TrackSnapshot> ground_truth_as_tracks(std::span<const GroundTruthRecord> gt);

std::vector<GroundTruthRecord> read_ground_truth(std::istream& in);
std::vector<GroundTruthRecord> read_ground_truth_file(const std::filesystem::path& path);
void write_ground_truth(std::span<const GroundTruthRecord> gt, std::ostream& out);
void write_ground_truth_file(std::span<const GroundTruthRecord> gt, const std::filesystem::path& path);

void write_report_csv(const EvalReport& report, std::ostream& out);
void write_report_table(const EvalReport& report, std::ostream& out);

}  // namespace evtrack
