#include "coopsim/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "coopsim/errors.hpp"
#include "coopsim/geometry.hpp"

namespace coopsim {

namespace {

struct RankedPred {
  double confidence;
  std::size_t frame;
  std::size_t index;  // position within its frame's prediction list
};

// Area under the precision envelope, all recall points.
double average_precision(const std::vector<bool>& is_tp, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  precision.reserve(is_tp.size());
  recall.reserve(is_tp.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < is_tp.size(); ++i) {
    tp += is_tp[i] ? 1 : 0;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  double ap = 0.0;
  double envelope = 0.0;
  for (std::size_t i = is_tp.size(); i-- > 0;) {
    envelope = std::max(envelope, precision[i]);
    const double prev_recall = i == 0 ? 0.0 : recall[i - 1];
    ap += (recall[i] - prev_recall) * envelope;
  }
  return ap;
}

}  // namespace

EvalReport evaluate_map(std::span<const std::vector<Detection>> predictions,
                        std::span<const FrameTruth> truths, double iou_threshold) {
  if (predictions.size() != truths.size()) {
    throw InputError("evaluate_map: prediction frames do not align with ground truth anchors");
  }
  if (iou_threshold <= 0.0 || iou_threshold > 1.0) {
    throw InputError("evaluate_map: iou_threshold must lie in (0, 1]");
  }
  for (std::size_t f = 0; f < predictions.size(); ++f) {
    for (const Detection& d : predictions[f]) {
      if (std::abs(d.timestamp - truths[f].anchor_time) > 1e-6) {
        throw InputError("evaluate_map: prediction references an unknown anchor");
      }
    }
  }

  EvalReport report;
  double ap_sum = 0.0;
  std::size_t gt_classes = 0;

  for (ClassLabel label : kAllClasses) {
    std::size_t num_gt = 0;
    for (const FrameTruth& frame : truths) {
      for (const FrameObject& obj : frame.objects) {
        if (obj.class_label == label) ++num_gt;
      }
    }

    std::vector<RankedPred> ranked;
    for (std::size_t f = 0; f < predictions.size(); ++f) {
      for (std::size_t i = 0; i < predictions[f].size(); ++i) {
        if (predictions[f][i].class_label == label) {
          ranked.push_back({predictions[f][i].confidence, f, i});
        }
      }
    }
    if (num_gt == 0 && ranked.empty()) continue;

    std::sort(ranked.begin(), ranked.end(), [](const RankedPred& a, const RankedPred& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      if (a.frame != b.frame) return a.frame < b.frame;
      return a.index < b.index;
    });

    std::vector<std::vector<bool>> gt_used(truths.size());
    for (std::size_t f = 0; f < truths.size(); ++f) {
      gt_used[f].assign(truths[f].objects.size(), false);
    }

    std::vector<bool> is_tp;
    is_tp.reserve(ranked.size());
    for (const RankedPred& p : ranked) {
      const Detection& det = predictions[p.frame][p.index];
      const FrameTruth& frame = truths[p.frame];
      double best_iou = 0.0;
      std::size_t best_gt = frame.objects.size();
      for (std::size_t g = 0; g < frame.objects.size(); ++g) {
        if (gt_used[p.frame][g] || frame.objects[g].class_label != label) continue;
        const double iou = oriented_iou(det.box(), frame.objects[g].box());
        if (iou > best_iou) {
          best_iou = iou;
          best_gt = g;
        }
      }
      if (best_gt < frame.objects.size() && best_iou >= iou_threshold) {
        gt_used[p.frame][best_gt] = true;
        is_tp.push_back(true);
      } else {
        is_tp.push_back(false);
      }
    }

    ClassAp row;
    row.class_label = label;
    row.num_gt = num_gt;
    row.num_pred = ranked.size();
    row.ap = average_precision(is_tp, num_gt);
    report.per_class.push_back(row);
    if (num_gt > 0) {
      ap_sum += row.ap;
      ++gt_classes;
    }
  }
  report.mean_ap = gt_classes > 0 ? ap_sum / static_cast<double>(gt_classes) : 0.0;
  return report;
}

}  // namespace coopsim
