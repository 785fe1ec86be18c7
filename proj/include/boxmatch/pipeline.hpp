#pragma once

#include <string>
#include <vector>

#include "boxmatch/assignment.hpp"
#include "boxmatch/evaluation.hpp"
#include "boxmatch/filter_model.hpp"
#include "boxmatch/selection.hpp"
#include "boxmatch/synth.hpp"

namespace boxmatch {

struct Paths {
    std::string scenes = "scenes.jsonl";
    std::string checkpoint = "filter.ckpt";
    std::string output = "metrics.csv";
};

struct PipelineConfig {
    SelectorConfig selector;
    GreedyMatchConfig greedy;
    FilterConfig filter;
    SynthConfig synth;
    int n_scenes = 100;
    Paths paths;
};

// Selected pool, ranks and greedy keep labels for every scene; the training
// set of the query filter.
std::vector<SceneExample> build_training_set(const std::vector<Scene>& scenes,
                                             const SelectorConfig& selector,
                                             const GreedyMatchConfig& greedy);

struct RunResult {
    std::vector<std::vector<Detection>> final_dets;  // per scene, scene order
    PrMetrics metrics;
};

// select -> rank -> featurize -> filter -> score-gap thresholding, then
// metrics over the surviving detections.
RunResult run_pipeline(const std::vector<Scene>& scenes, const FilterParams& params,
                       const PipelineConfig& cfg);

enum class SweepAxis { nms_iou, theta, dups_per_gt, gt_overlap };

SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

struct SweepRow {
    double value = 0.0;
    double nms_ap = 0.0;
    double nms_recall = 0.0;
    double nms_ideal_recall = 0.0;
    double greedy_ap = 0.0;
    double greedy_recall = 0.0;
    double greedy_ideal_recall = 0.0;
};

// One row per axis value comparing the NMS-filtered set against the
// greedy-matching keep set on freshly generated scenes.
std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& values,
                            const PipelineConfig& base);

// Raises InputError naming both shapes when the checkpoint dims disagree with
// the configured filter dims.
void check_dims(const FilterParams& params, const FilterConfig& cfg);

}  // namespace boxmatch
