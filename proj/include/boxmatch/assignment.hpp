#pragma once

#include <utility>
#include <vector>

#include "boxmatch/types.hpp"

namespace boxmatch {

struct CostWeights {
    double w_category = 2.0;
    double w_l1 = 5.0;
    double w_giou = 2.0;
};

struct GreedyMatchConfig {
    int theta = 30;          // rank-index demotion window
    double iou_floor = 0.6;  // minimum IoU to the assigned GT for retention
    CostWeights weights;
};

// Per-detection label produced by greedy_match.
struct DetectionLabel {
    int assigned_gt = -1;  // -1 = none
    bool keep = false;
    bool demoted = false;
    int rank = 0;
};

using LabelAssignment = std::vector<DetectionLabel>;

// DETR-style matching cost: weighted category margin + center-size L1 +
// (1 - giou). Category term is (1 - score) on a category match, (1 + score)
// otherwise.
double pair_cost(const Detection& d, const GroundTruth& g, const CostWeights& w);

// Exact minimum-cost one-to-one assignment on a dense rectangular matrix.
// Returns min(n_rows, n_cols) pairs sorted by row; among all minimum-cost
// assignments the lexicographically smallest (by row, then col) is returned.
// Non-finite entries are rejected.
std::vector<std::pair<int, int>> hungarian(const std::vector<std::vector<double>>& cost);

// Hungarian over the pair_cost matrix; result[i] is the ground-truth index
// assigned to detection i, or -1 when unmatched.
std::vector<int> one_to_one_targets(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    const CostWeights& w);

// One-to-many label assignment: cluster every detection onto its minimum-cost
// ground truth, demote poorly localized high-rank members, and keep the
// best-ranked eligible member of each cluster. ranks must be a permutation of
// 0..n-1 with 0 the highest confidence.
LabelAssignment greedy_match(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts,
                             const std::vector<int>& ranks,
                             const GreedyMatchConfig& cfg);

}  // namespace boxmatch
