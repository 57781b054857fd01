#pragma once

#include <span>
#include <vector>

#include "coopsim/detection.hpp"
#include "coopsim/scenario.hpp"

namespace coopsim {

struct ClassAp {
  ClassLabel class_label = ClassLabel::Car;
  double ap = 0.0;
  std::size_t num_gt = 0;
  std::size_t num_pred = 0;
};

struct EvalReport {
  std::vector<ClassAp> per_class;  // every class seen in GT or predictions
  double mean_ap = 0.0;            // averaged over classes present in GT
};

// All-points interpolated average precision at a BEV IoU threshold. A
// prediction is a true positive when it claims an unmatched ground-truth
// object of its class in its own frame with IoU >= iou_threshold; candidates
// are ranked by confidence (ties broken by frame then input position).
// `predictions[i]` must belong to `truths[i]`; a detection whose timestamp
// disagrees with its frame's anchor is an input error.
EvalReport evaluate_map(std::span<const std::vector<Detection>> predictions,
                        std::span<const FrameTruth> truths, double iou_threshold = 0.5);

}  // namespace coopsim
