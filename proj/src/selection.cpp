#include "boxmatch/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace boxmatch {

namespace {

std::vector<int> score_order(const std::vector<Detection>& dets) {
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dets[a].score > dets[b].score; });
    return order;
}

}  // namespace

std::vector<int> nms(const std::vector<Detection>& dets, double iou_threshold) {
    std::vector<int> kept;
    for (int i : score_order(dets)) {
        bool suppressed = false;
        for (int j : kept) {
            if (dets[j].category != dets[i].category) continue;
            if (iou(dets[i].box, dets[j].box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(i);
    }
    return kept;
}

std::vector<int> topk_select(const std::vector<Detection>& dets, int k) {
    if (k < 1) throw std::invalid_argument("topk_select: k must be >= 1");
    std::vector<int> order = score_order(dets);
    if (static_cast<int>(order.size()) > k) order.resize(k);
    return order;
}

std::vector<int> confidence_filter(const std::vector<Detection>& dets, double threshold) {
    std::vector<int> kept;
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
        if (dets[i].score > threshold) kept.push_back(i);
    }
    return kept;
}

std::vector<int> query_select(const std::vector<Detection>& dets, const SelectorConfig& cfg) {
    if (cfg.mode == SelectorMode::topk) return topk_select(dets, cfg.k);
    std::vector<int> kept = nms(dets, cfg.nms_iou);
    if (static_cast<int>(kept.size()) > cfg.k) kept.resize(cfg.k);
    return kept;
}

}  // namespace boxmatch
