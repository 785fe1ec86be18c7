#pragma once

#include <vector>

#include "boxmatch/types.hpp"

namespace boxmatch {

// Aggregate detection metrics over a batch of scenes. AP columns follow the
// COCO convention: per-category 101-point interpolated AP averaged over the
// IoU thresholds 0.50:0.05:0.95 and over categories present in ground truth.
struct PrMetrics {
    int scene_count = 0;
    std::vector<double> ap_per_threshold;  // mean over categories, one per IoU threshold
    double ap = 0.0;                       // mean of ap_per_threshold
    double ap50 = 0.0;
    double ap75 = 0.0;
    double recall = 0.0;        // TP / GT at IoU 0.5 over the evaluated set
    double ideal_recall = 0.0;  // maximum-matching coverage at IoU 0.5
};

// Greedy TP/FP flags. Detections must already be sorted descending by score
// (index tie-break). A detection is TP iff an unclaimed same-category ground
// truth of maximal IoU reaches iou_thr; that ground truth becomes claimed.
std::vector<char> match_tp_fp(const std::vector<Detection>& sorted_dets,
                              const std::vector<GroundTruth>& gts, double iou_thr);

// 101-point interpolated average precision from ordered TP/FP flags.
// n_gt = 0: 1.0 with no detections, 0.0 otherwise.
double average_precision(const std::vector<char>& flags, int n_gt);

// Mean AP over IoU thresholds 0.50:0.05:0.95 and over categories with at
// least one ground truth.
double coco_map(const std::vector<std::vector<Detection>>& dets_per_scene,
                const std::vector<std::vector<GroundTruth>>& gts_per_scene);

// Fraction of ground truths coverable by an optimal one-to-one matching
// against the kept set (same category, IoU >= iou_thr). Empty ground truths
// yield 1.0 by convention.
double ideal_recall(const std::vector<Detection>& kept,
                    const std::vector<GroundTruth>& gts, double iou_thr);

// Full metric bundle for the harness CSV.
PrMetrics evaluate(const std::vector<std::vector<Detection>>& dets_per_scene,
                   const std::vector<std::vector<GroundTruth>>& gts_per_scene);

}  // namespace boxmatch
