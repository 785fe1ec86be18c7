#pragma once

#include <cstdint>
#include <vector>

#include "boxmatch/types.hpp"

namespace boxmatch {

// Crowded-scene generator knobs. Scenes are a pure function of
// (seed, scene_index); draws use a counter-based generator so parallel
// generation and call order cannot change the data.
struct SynthConfig {
    int n_gts = 4;
    int categories = 1;
    double gt_overlap = 0.3;     // target IoU between adjacent GT pairs
    int dups_per_gt = 4;         // duplicate detections emitted per GT
    double jitter_sigma = 0.01;  // box-coordinate noise scale
    double score_iou_corr = 0.0; // couples score order to IoU order, in [-1,1]
    double fp_rate = 1.0;        // Poisson mean of background false positives
    std::uint64_t seed = 1;
};

Scene gen_scene(const SynthConfig& cfg, int scene_index);
std::vector<Scene> gen_dataset(const SynthConfig& cfg, int n_scenes);

}  // namespace boxmatch
