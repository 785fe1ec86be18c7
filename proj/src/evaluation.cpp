#include "boxmatch/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "boxmatch/assignment.hpp"

namespace boxmatch {

std::vector<char> match_tp_fp(const std::vector<Detection>& sorted_dets,
                              const std::vector<GroundTruth>& gts, double iou_thr) {
    std::vector<char> flags(sorted_dets.size(), 0);
    std::vector<char> claimed(gts.size(), 0);
    for (std::size_t i = 0; i < sorted_dets.size(); ++i) {
        int best_g = -1;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (claimed[g] || gts[g].category != sorted_dets[i].category) continue;
            const double v = iou(sorted_dets[i].box, gts[g].box);
            if (v > best_iou) {
                best_iou = v;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0 && best_iou >= iou_thr) {
            flags[i] = 1;
            claimed[best_g] = 1;
        }
    }
    return flags;
}

double average_precision(const std::vector<char>& flags, int n_gt) {
    if (n_gt <= 0) return flags.empty() ? 1.0 : 0.0;
    const std::size_t n = flags.size();
    std::vector<double> precision(n), recall(n);
    int tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += flags[i] ? 1 : 0;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / n_gt;
    }
    // suffix max exploits that recall is non-decreasing in i
    std::vector<double> best_at_or_after(n);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        running = std::max(running, precision[i]);
        best_at_or_after[i] = running;
    }
    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double want = r / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), want);
        if (it != recall.end()) sum += best_at_or_after[it - recall.begin()];
    }
    return sum / 101.0;
}

namespace {

constexpr double kIouThresholds[] = {0.50, 0.55, 0.60, 0.65, 0.70,
                                     0.75, 0.80, 0.85, 0.90, 0.95};

struct IndexedDet {
    int scene;
    int index;
    double score;
};

// per-category AP at one threshold, detections pooled across scenes
double category_ap(const std::vector<std::vector<Detection>>& dets_per_scene,
                   const std::vector<std::vector<GroundTruth>>& gts_per_scene,
                   int category, double thr, int n_gt) {
    std::vector<IndexedDet> pool;
    for (int s = 0; s < static_cast<int>(dets_per_scene.size()); ++s) {
        for (int i = 0; i < static_cast<int>(dets_per_scene[s].size()); ++i) {
            if (dets_per_scene[s][i].category == category)
                pool.push_back({s, i, dets_per_scene[s][i].score});
        }
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const IndexedDet& a, const IndexedDet& b) { return a.score > b.score; });

    std::vector<std::vector<char>> claimed(gts_per_scene.size());
    for (std::size_t s = 0; s < gts_per_scene.size(); ++s)
        claimed[s].assign(gts_per_scene[s].size(), 0);

    std::vector<char> flags(pool.size(), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Detection& d = dets_per_scene[pool[i].scene][pool[i].index];
        const auto& gts = gts_per_scene[pool[i].scene];
        int best_g = -1;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (claimed[pool[i].scene][g] || gts[g].category != category) continue;
            const double v = iou(d.box, gts[g].box);
            if (v > best_iou) {
                best_iou = v;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0 && best_iou >= thr) {
            flags[i] = 1;
            claimed[pool[i].scene][best_g] = 1;
        }
    }
    return average_precision(flags, n_gt);
}

std::map<int, int> gt_counts(const std::vector<std::vector<GroundTruth>>& gts_per_scene) {
    std::map<int, int> counts;
    for (const auto& gts : gts_per_scene)
        for (const auto& g : gts) counts[g.category] += 1;
    return counts;
}

}  // namespace

double coco_map(const std::vector<std::vector<Detection>>& dets_per_scene,
                const std::vector<std::vector<GroundTruth>>& gts_per_scene) {
    const auto counts = gt_counts(gts_per_scene);
    if (counts.empty()) {
        for (const auto& dets : dets_per_scene)
            if (!dets.empty()) return 0.0;
        return 1.0;
    }
    double total = 0.0;
    for (double thr : kIouThresholds) {
        double per_thr = 0.0;
        for (const auto& [cat, n_gt] : counts)
            per_thr += category_ap(dets_per_scene, gts_per_scene, cat, thr, n_gt);
        total += per_thr / static_cast<double>(counts.size());
    }
    return total / 10.0;
}

namespace {

// size of the maximum one-to-one matching, via Hungarian on 1-IoU with
// ineligible pairs at a large finite cost
int ideal_matched(const std::vector<Detection>& kept,
                  const std::vector<GroundTruth>& gts, double iou_thr) {
    if (kept.empty() || gts.empty()) return 0;
    constexpr double kForbidden = 1e6;
    std::vector<std::vector<double>> cost(kept.size(), std::vector<double>(gts.size(), kForbidden));
    std::vector<std::vector<char>> eligible(kept.size(), std::vector<char>(gts.size(), 0));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (kept[i].category != gts[g].category) continue;
            const double v = iou(kept[i].box, gts[g].box);
            if (v >= iou_thr) {
                cost[i][g] = 1.0 - v;
                eligible[i][g] = 1;
            }
        }
    }
    int matched = 0;
    for (const auto& [r, c] : hungarian(cost))
        if (eligible[r][c]) ++matched;
    return matched;
}

}  // namespace

double ideal_recall(const std::vector<Detection>& kept,
                    const std::vector<GroundTruth>& gts, double iou_thr) {
    if (gts.empty()) return 1.0;
    return static_cast<double>(ideal_matched(kept, gts, iou_thr)) /
           static_cast<double>(gts.size());
}

PrMetrics evaluate(const std::vector<std::vector<Detection>>& dets_per_scene,
                   const std::vector<std::vector<GroundTruth>>& gts_per_scene) {
    PrMetrics m;
    m.scene_count = static_cast<int>(gts_per_scene.size());

    const auto counts = gt_counts(gts_per_scene);
    m.ap_per_threshold.assign(10, 0.0);
    if (counts.empty()) {
        bool any_dets = false;
        for (const auto& dets : dets_per_scene) any_dets = any_dets || !dets.empty();
        const double ap = any_dets ? 0.0 : 1.0;
        m.ap_per_threshold.assign(10, ap);
        m.ap = m.ap50 = m.ap75 = ap;
        m.recall = 1.0;
        m.ideal_recall = 1.0;
        return m;
    }
    for (int t = 0; t < 10; ++t) {
        double per_thr = 0.0;
        for (const auto& [cat, n_gt] : counts)
            per_thr += category_ap(dets_per_scene, gts_per_scene, cat, kIouThresholds[t], n_gt);
        m.ap_per_threshold[t] = per_thr / static_cast<double>(counts.size());
    }
    m.ap = std::accumulate(m.ap_per_threshold.begin(), m.ap_per_threshold.end(), 0.0) / 10.0;
    m.ap50 = m.ap_per_threshold[0];
    m.ap75 = m.ap_per_threshold[5];

    long total_gt = 0, total_tp = 0, total_ideal = 0;
    for (std::size_t s = 0; s < gts_per_scene.size(); ++s) {
        std::vector<Detection> sorted = dets_per_scene[s];
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const Detection& a, const Detection& b) { return a.score > b.score; });
        const auto flags = match_tp_fp(sorted, gts_per_scene[s], 0.5);
        total_tp += std::count(flags.begin(), flags.end(), char(1));
        total_gt += static_cast<long>(gts_per_scene[s].size());
        total_ideal += ideal_matched(dets_per_scene[s], gts_per_scene[s], 0.5);
    }
    m.recall = total_gt > 0 ? static_cast<double>(total_tp) / static_cast<double>(total_gt) : 1.0;
    m.ideal_recall = total_gt > 0 ? static_cast<double>(total_ideal) / static_cast<double>(total_gt) : 1.0;
    return m;
}

}  // namespace boxmatch
