#pragma once

#include <vector>

#include "boxmatch/types.hpp"

namespace boxmatch {

enum class SelectorMode { topk, nms };

struct SelectorConfig {
    SelectorMode mode = SelectorMode::topk;
    int k = 100;
    double nms_iou = 0.7;
};

// Greedy suppression in descending score order (index tie-break). A detection
// survives iff its IoU with every already-kept detection of the same category
// is <= iou_threshold. Returns kept indices, highest score first.
std::vector<int> nms(const std::vector<Detection>& dets, double iou_threshold);

// The min(k, n) highest-scored detections, score-descending, index tie-break.
std::vector<int> topk_select(const std::vector<Detection>& dets, int k);

// Detections with score strictly above the threshold, original order.
std::vector<int> confidence_filter(const std::vector<Detection>& dets, double threshold);

// The dense-to-sparse transition: top-k, or NMS truncated to the first k
// survivors.
std::vector<int> query_select(const std::vector<Detection>& dets, const SelectorConfig& cfg);

}  // namespace boxmatch
