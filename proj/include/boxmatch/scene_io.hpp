#pragma once

#include <string>
#include <vector>

#include "boxmatch/assignment.hpp"
#include "boxmatch/evaluation.hpp"
#include "boxmatch/pipeline.hpp"
#include "boxmatch/types.hpp"

namespace boxmatch {

// Scene files are JSON lines, one scene object per line:
// {"scene_id": "...", "image_size": [w, h],
//  "ground_truths": [{"box": [cx, cy, w, h], "category": 0}, ...],
//  "detections": [{"box": [...], "score": 0.9, "category": 0}, ...]}
std::vector<Scene> read_scenes_jsonl(const std::string& path);
void write_scenes_jsonl(const std::string& path, const std::vector<Scene>& scenes);

// Pipeline config as a single JSON document mirroring PipelineConfig field
// names; missing fields keep their defaults, unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(const std::string& text, const std::string& origin);

// Fixed-order metrics CSV: scene_count,ap,ap50,ap75,recall,ideal_recall
void write_metrics_csv(const std::string& path, const PrMetrics& metrics);

// Sweep CSV: axis,value,nms_ap,nms_recall,nms_ideal_recall,
//            greedy_ap,greedy_recall,greedy_ideal_recall
void write_sweep_csv(const std::string& path, SweepAxis axis,
                     const std::vector<SweepRow>& rows);

// Greedy labels per scene, one JSON object per line.
void write_labels_jsonl(const std::string& path, const std::vector<Scene>& scenes,
                        const std::vector<std::vector<int>>& pools,
                        const std::vector<LabelAssignment>& labels);

// 6 significant digits, the stable float format used in CSV output.
std::string format_sig6(double v);

}  // namespace boxmatch
