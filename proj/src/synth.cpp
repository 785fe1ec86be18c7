#include "boxmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "boxmatch/errors.hpp"
#include "boxmatch/rng.hpp"

namespace boxmatch {

namespace {

constexpr double kMinScore = 0.05;
constexpr double kMaxScore = 0.99;
constexpr double kScoreGrid = 0.05;  // quantized scores make exact ties possible

double quantize_score(double s) {
    const double q = std::round(s / kScoreGrid) * kScoreGrid;
    return std::min(kMaxScore, std::max(kMinScore, q));
}

BoundingBox clip_to_unit(const BoundingBox& b) {
    Corners c = to_corners(b);
    c.x1 = std::min(1.0, std::max(0.0, c.x1));
    c.y1 = std::min(1.0, std::max(0.0, c.y1));
    c.x2 = std::min(1.0, std::max(0.0, c.x2));
    c.y2 = std::min(1.0, std::max(0.0, c.y2));
    if (c.x2 < c.x1) c.x2 = c.x1;
    if (c.y2 < c.y1) c.y2 = c.y1;
    return from_corners(c.x1, c.y1, c.x2, c.y2);
}

// Scores are assigned to duplicates through a sort key that interpolates
// between IoU order (corr=+1), its reverse (corr=-1), and noise (corr=0).
std::vector<int> score_assignment_order(const std::vector<double>& ious, double corr,
                                        CounterRng& rng) {
    const int m = static_cast<int>(ious.size());
    std::vector<int> iou_order(m);
    std::iota(iou_order.begin(), iou_order.end(), 0);
    std::stable_sort(iou_order.begin(), iou_order.end(),
                     [&](int a, int b) { return ious[a] > ious[b]; });
    std::vector<double> iou_pos(m, 0.0);
    for (int r = 0; r < m; ++r) iou_pos[iou_order[r]] = m > 1 ? r / double(m - 1) : 0.0;

    std::vector<double> key(m);
    for (int i = 0; i < m; ++i) {
        const double noise = rng.next_double();
        key[i] = corr * iou_pos[i] + (1.0 - std::abs(corr)) * noise;
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key[a] < key[b]; });
    return order;  // order[0] receives the highest score
}

}  // namespace

Scene gen_scene(const SynthConfig& cfg, int scene_index) {
    if (cfg.n_gts < 0 || cfg.dups_per_gt < 0 || cfg.jitter_sigma < 0.0 || cfg.fp_rate < 0.0)
        throw InputError("gen_scene: negative count or scale in config");
    if (cfg.gt_overlap < 0.0 || cfg.gt_overlap >= 1.0)
        throw InputError("gen_scene: gt_overlap must be in [0,1)");

    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(scene_index));

    Scene scene;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "scene-%06d", scene_index);
        scene.scene_id = buf;
    }

    // chain layout: equal-size boxes stepped along x so each adjacent pair
    // meets the target IoU exactly ((w - dx) / (w + dx) = overlap)
    const double step_factor = (1.0 - cfg.gt_overlap) / (1.0 + cfg.gt_overlap);
    if (cfg.n_gts > 0) {
        const double span = 1.0 + (cfg.n_gts - 1) * step_factor;  // total width in units of w
        double w = std::min(0.35, 0.84 / span);
        if (w < 0.02) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "gen_scene: scene %d: cannot place %d ground truths at overlap %.3f",
                          scene_index, cfg.n_gts, cfg.gt_overlap);
            throw InputError(buf);
        }
        const double h = w * rng.uniform(0.85, 1.15);
        const double dx = w * step_factor;
        const double x0 = (1.0 - w * span) / 2.0 + w / 2.0;
        const double cy = 0.5 + rng.uniform(-0.05, 0.05);
        for (int i = 0; i < cfg.n_gts; ++i) {
            GroundTruth gt;
            gt.box = {x0 + i * dx, cy, w, std::min(h, 0.98)};
            gt.category = cfg.categories > 1 ? rng.uniform_int(cfg.categories) : 0;
            scene.ground_truths.push_back(gt);
        }
    }

    // duplicate detections around each GT
    for (const auto& gt : scene.ground_truths) {
        const int m = cfg.dups_per_gt;
        if (m == 0) continue;
        std::vector<BoundingBox> boxes(m);
        std::vector<double> ious(m);
        for (int j = 0; j < m; ++j) {
            BoundingBox b = gt.box;
            b.cx += rng.normal(0.0, cfg.jitter_sigma);
            b.cy += rng.normal(0.0, cfg.jitter_sigma);
            b.w = std::max(0.0, b.w + rng.normal(0.0, cfg.jitter_sigma));
            b.h = std::max(0.0, b.h + rng.normal(0.0, cfg.jitter_sigma));
            boxes[j] = clip_to_unit(b);
            ious[j] = iou(boxes[j], gt.box);
        }
        std::vector<double> scores(m);
        for (int j = 0; j < m; ++j) scores[j] = quantize_score(rng.uniform(0.3, 0.99));
        std::sort(scores.begin(), scores.end(), std::greater<double>());
        const auto order = score_assignment_order(ious, cfg.score_iou_corr, rng);
        std::vector<double> assigned(m);
        for (int r = 0; r < m; ++r) assigned[order[r]] = scores[r];
        for (int j = 0; j < m; ++j)
            scene.detections.push_back({boxes[j], assigned[j], gt.category});
    }

    // background false positives with low scores
    const int n_fp = rng.poisson(cfg.fp_rate);
    for (int j = 0; j < n_fp; ++j) {
        BoundingBox b;
        b.cx = rng.uniform(0.05, 0.95);
        b.cy = rng.uniform(0.05, 0.95);
        b.w = rng.uniform(0.02, 0.15);
        b.h = rng.uniform(0.02, 0.15);
        const double score = quantize_score(rng.uniform(kMinScore, 0.3));
        const int cat = cfg.categories > 1 ? rng.uniform_int(cfg.categories) : 0;
        scene.detections.push_back({clip_to_unit(b), score, cat});
    }
    return scene;
}

std::vector<Scene> gen_dataset(const SynthConfig& cfg, int n_scenes) {
    if (n_scenes < 1) throw InputError("gen_dataset: n_scenes must be >= 1");
    std::vector<Scene> scenes;
    scenes.reserve(n_scenes);
    for (int i = 0; i < n_scenes; ++i) scenes.push_back(gen_scene(cfg, i));
    return scenes;
}

}  // namespace boxmatch
