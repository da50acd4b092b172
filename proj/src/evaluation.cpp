#include "evtrack/evaluation.hpp"

#include <algorithm>
#include <map>

#include "evtrack/eot.hpp"
#include "evtrack/error.hpp"
#include "evtrack/text.hpp"

namespace evtrack {
namespace {

// Per-object time-ordered histories, in ascending object id.
class GroundTruthIndex {
 public:
  explicit GroundTruthIndex(std::span<const GroundTruthRecord> gt) {
    std::map<std::int64_t, std::vector<TrackSnapshot>> by_id;
    for (const GroundTruthRecord& r : gt) {
      auto& h = by_id[r.object_id];
      if (!h.empty() && r.t <= h.back().t) {
        throw Error(Errc::malformed_row, "ground truth of object " + std::to_string(r.object_id) +
                                             " is not strictly time-ordered at t=" + std::to_string(r.t));
      }
      h.push_back(TrackSnapshot{r.object_id, r.t, r.box, TrackState::locked, 0.0, 0.0});
    }
    for (auto& [id, h] : by_id) {
      ids_.push_back(id);
      histories_.push_back(std::move(h));
    }
  }

  std::vector<std::pair<std::int64_t, BoxF>> at(std::uint64_t t) const {
    std::vector<std::pair<std::int64_t, BoxF>> out;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      const auto& h = histories_[i];
      if (t < h.front().t || t > h.back().t) continue;
      out.emplace_back(ids_[i], interpolate_snapshot(h, t).box);
    }
    return out;
  }

  std::span<const std::int64_t> ids() const { return ids_; }

  std::uint64_t t_min() const {
    std::uint64_t t = UINT64_MAX;
    for (const auto& h : histories_) t = std::min(t, h.front().t);
    return t;
  }
  std::uint64_t t_max() const {
    std::uint64_t t = 0;
    for (const auto& h : histories_) t = std::max(t, h.back().t);
    return t;
  }

 private:
  std::vector<std::int64_t> ids_;
  std::vector<std::vector<TrackSnapshot>> histories_;
};

void check_thresholds(std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error(Errc::invalid_config, "threshold sweep is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw Error(Errc::invalid_config, "thresholds must lie in (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw Error(Errc::invalid_config, "thresholds must be strictly increasing");
    }
  }
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double iou(const BoxF& a, const BoxF& b) {
  const double inter = overlap_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<MatchedPair> greedy_pairs(std::span<const BoxF> pred, std::span<const BoxF> gt) {
  std::vector<MatchedPair> candidates;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double v = iou(pred[i], gt[j]);
      if (v > 0.0) candidates.push_back(MatchedPair{i, j, v});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });
  std::vector<bool> pred_used(pred.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<MatchedPair> pairs;
  for (const MatchedPair& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = true;
    gt_used[c.gt] = true;
    pairs.push_back(c);
  }
  return pairs;
}

FrameMatch match_frame(std::span<const BoxF> pred, std::span<const BoxF> gt, double theta) {
  FrameMatch m;
  for (const MatchedPair& p : greedy_pairs(pred, gt)) {
    if (p.iou >= theta) m.pairs.push_back(p);
  }
  m.tp = m.pairs.size();
  m.fp = pred.size() - m.tp;
  m.fn = gt.size() - m.tp;
  return m;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 1; k <= 19; ++k) t.push_back(k / 20.0);
  return t;
}

std::vector<std::pair<std::int64_t, BoxF>> ground_truth_at(std::span<const GroundTruthRecord> gt, std::uint64_t t) {
  return GroundTruthIndex(gt).at(t);
}

EvalReport pr_sweep(std::span<const TrackSnapshot> pred, std::span<const GroundTruthRecord> gt,
                    const EvalOptions& options) {
  check_thresholds(options.thresholds);
  if (gt.empty()) throw Error(Errc::empty_ground_truth, "no ground-truth records");
  if (options.frame_period_us && *options.frame_period_us == 0) {
    throw Error(Errc::invalid_config, "evaluation frame period must be > 0");
  }
  const GroundTruthIndex index(gt);
  const std::size_t nt = options.thresholds.size();

  // Every prediction timestamp is an evaluation time, including those whose
  // snapshots are all filtered out, so missed objects there count as FN.
  std::map<std::uint64_t, std::vector<BoxF>> frames;
  for (const TrackSnapshot& s : pred) {
    auto& boxes = frames[s.t];
    if (s.state == TrackState::locked || options.include_tracking) boxes.push_back(s.box);
  }
  if (options.frame_period_us) {
    const std::uint64_t p = *options.frame_period_us;
    for (std::uint64_t t = (index.t_min() + p - 1) / p * p; t <= index.t_max(); t += p) frames[t];
  }

  std::vector<std::uint64_t> tp(nt, 0), fp(nt, 0), fn(nt, 0);
  std::map<std::int64_t, std::vector<bool>> detected;
  for (std::int64_t id : index.ids()) detected[id].assign(nt, false);

  std::vector<BoxF> gt_boxes;
  for (const auto& [t, boxes] : frames) {
    const auto truth = index.at(t);
    gt_boxes.clear();
    for (const auto& [id, b] : truth) gt_boxes.push_back(b);
    const auto pairs = greedy_pairs(boxes, gt_boxes);
    for (std::size_t k = 0; k < nt; ++k) {
      std::uint64_t hits = 0;
      for (const MatchedPair& p : pairs) {
        if (p.iou < options.thresholds[k]) break;  // descending
        ++hits;
        detected[truth[p.gt].first][k] = true;
      }
      tp[k] += hits;
      fp[k] += boxes.size() - hits;
      fn[k] += gt_boxes.size() - hits;
    }
  }

  EvalReport report;
  report.frames = frames.size();
  report.include_tracking = options.include_tracking;
  for (const auto& [id, d] : detected) report.objects.push_back(ObjectDetection{id, d});
  for (std::size_t k = 0; k < nt; ++k) {
    ThresholdScore s;
    s.theta = options.thresholds[k];
    s.tp = tp[k];
    s.fp = fp[k];
    s.fn = fn[k];
    s.precision = ratio(tp[k], tp[k] + fp[k]);
    s.recall = ratio(tp[k], tp[k] + fn[k]);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    std::uint64_t hit_objects = 0;
    for (const auto& o : report.objects) hit_objects += o.detected[k] ? 1 : 0;
    s.detection_prob = ratio(hit_objects, report.objects.size());
    report.scores.push_back(s);
  }
  return report;
}

double detection_probability(std::span<const TrackSnapshot> pred, std::span<const GroundTruthRecord> gt,
                             double theta, const EvalOptions& options) {
  EvalOptions single = options;
  single.thresholds = {theta};
  return pr_sweep(pred, gt, single).scores.front().detection_prob;
}

std::vector<TrackSnapshot> ground_truth_as_tracks(std::span<const GroundTruthRecord> gt) {
  std::vector<TrackSnapshot> out;
  out.reserve(gt.size());
  for (const GroundTruthRecord& r : gt) {
    out.push_back(TrackSnapshot{r.object_id, r.t, r.box, TrackState::locked, 0.0, 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const TrackSnapshot& a, const TrackSnapshot& b) { return a.t < b.t; });
  return out;
}

std::vector<GroundTruthRecord> read_ground_truth(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || line != kGroundTruthCsvHeader) {
    throw Error(Errc::malformed_row,
                "expected ground-truth CSV header \"" + std::string(kGroundTruthCsvHeader) + "\"");
  }
  std::vector<GroundTruthRecord> gt;
  std::map<std::int64_t, std::uint64_t> last_t;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split(line);
    GroundTruthRecord r;
    if (f.size() != 7 || !text::parse_i64(f[0], r.object_id) || !text::parse_u64(f[1], r.t) ||
        !text::parse_double(f[2], r.box.x) || !text::parse_double(f[3], r.box.y) ||
        !text::parse_double(f[4], r.box.w) || !text::parse_double(f[5], r.box.h) || r.box.w < 0 ||
        r.box.h < 0) {
      throw Error(Errc::malformed_row, "line " + std::to_string(line_no) + ": \"" + line + "\"");
    }
    const auto [it, fresh] = last_t.try_emplace(r.object_id, r.t);
    if (!fresh) {
      if (r.t <= it->second) {
        throw Error(Errc::malformed_row, "line " + std::to_string(line_no) + ": object " +
                                             std::to_string(r.object_id) + " records out of time order");
      }
      it->second = r.t;
    }
    r.class_label = std::string(f[6]);
    gt.push_back(std::move(r));
  }
  return gt;
}

std::vector<GroundTruthRecord> read_ground_truth_file(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_ground_truth(in);
}

void write_ground_truth(std::span<const GroundTruthRecord> gt, std::ostream& out) {
  std::string buf;
  buf.append(kGroundTruthCsvHeader).push_back('\n');
  for (const GroundTruthRecord& r : gt) {
    buf += std::to_string(r.object_id);
    buf += ',';
    buf += std::to_string(r.t);
    for (double v : {r.box.x, r.box.y, r.box.w, r.box.h}) {
      buf += ',';
      text::append_fixed(buf, v, 4);
    }
    buf += ',';
    buf += r.class_label;
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(Errc::io_failure, "write failed");
}

void write_ground_truth_file(std::span<const GroundTruthRecord> gt, const std::filesystem::path& path) {
  auto out = text::open_out(path);
  write_ground_truth(gt, out);
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  std::string buf;
  buf.append(kReportCsvHeader).push_back('\n');
  for (const ThresholdScore& s : report.scores) {
    text::append_fixed(buf, s.theta, 2);
    for (double v : {s.precision, s.recall, s.f1, s.detection_prob}) {
      buf += ',';
      text::append_fixed(buf, v, 6);
    }
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(Errc::io_failure, "write failed");
}

void write_report_table(const EvalReport& report, std::ostream& out) {
  out << "matching: greedy descending IoU, one-to-one; predictions: "
      << (report.include_tracking ? "locked + tracking" : "locked only") << "; frames: " << report.frames
      << "; objects: " << report.objects.size() << '\n';
  out << " theta  precision  recall     f1  det_prob        tp        fp        fn\n";
  auto pad = [&out](const std::string& s, std::size_t w) {
    out << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
  };
  for (const ThresholdScore& s : report.scores) {
    pad(text::fixed(s.theta, 2), 6);
    pad(text::fixed(s.precision, 4), 11);
    pad(text::fixed(s.recall, 4), 8);
    pad(text::fixed(s.f1, 4), 7);
    pad(text::fixed(s.detection_prob, 4), 10);
    pad(std::to_string(s.tp), 10);
    pad(std::to_string(s.fp), 10);
    pad(std::to_string(s.fn), 10);
    out << '\n';
  }
}

}  // namespace evtrack
