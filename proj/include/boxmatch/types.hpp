#pragma once

#include <array>
#include <string>
#include <vector>

#include "boxmatch/geometry.hpp"

namespace boxmatch {

// A stage-1 candidate: box plus confidence and category id.
struct Detection {
    BoundingBox box;
    double score = 0.0;
    int category = 0;
};

struct GroundTruth {
    BoundingBox box;
    int category = 0;
};

// One image's annotations and dense candidates; the unit all pipelines
// operate on. image_size is metadata only, boxes stay normalized.
struct Scene {
    std::string scene_id;
    std::array<int, 2> image_size = {640, 640};
    std::vector<GroundTruth> ground_truths;
    std::vector<Detection> detections;
};

}  // namespace boxmatch
