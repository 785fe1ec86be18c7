#include "boxmatch/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boxmatch/errors.hpp"

namespace boxmatch {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    std::ostringstream os;
    os << origin;
    if (line > 0) os << " line " << line;
    os << ": " << msg;
    throw InputError(os.str());
}

BoundingBox parse_box(const json& j, const std::string& origin, std::size_t line) {
    if (!j.is_array() || j.size() != 4) fail(origin, line, "box must be [cx, cy, w, h]");
    for (const auto& v : j)
        if (!v.is_number()) fail(origin, line, "box entries must be numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Scene parse_scene(const json& j, const std::string& origin, std::size_t line) {
    Scene s;
    if (!j.is_object()) fail(origin, line, "expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "scene_id") {
            if (!value.is_string()) fail(origin, line, "scene_id must be a string");
            s.scene_id = value.get<std::string>();
        } else if (key == "image_size") {
            if (!value.is_array() || value.size() != 2) fail(origin, line, "image_size must be [w, h]");
            s.image_size = {value[0].get<int>(), value[1].get<int>()};
        } else if (key == "ground_truths") {
            for (const auto& g : value) {
                GroundTruth gt;
                gt.box = parse_box(g.at("box"), origin, line);
                gt.category = g.at("category").get<int>();
                if (gt.category < 0) fail(origin, line, "category must be non-negative");
                s.ground_truths.push_back(gt);
            }
        } else if (key == "detections") {
            for (const auto& d : value) {
                Detection det;
                det.box = parse_box(d.at("box"), origin, line);
                det.score = d.at("score").get<double>();
                det.category = d.at("category").get<int>();
                if (det.score < 0.0 || det.score > 1.0) fail(origin, line, "score must be in [0,1]");
                if (det.category < 0) fail(origin, line, "category must be non-negative");
                s.detections.push_back(det);
            }
        } else {
            fail(origin, line, "unknown scene key: " + key);
        }
    }
    return s;
}

json box_json(const BoundingBox& b) {
    return json::array({b.cx, b.cy, b.w, b.h});
}

}  // namespace

std::vector<Scene> read_scenes_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scene file: " + path);
    std::vector<Scene> scenes;
    std::string buf;
    std::size_t lineno = 0;
    while (std::getline(in, buf)) {
        ++lineno;
        if (buf.empty()) continue;
        json j;
        try {
            j = json::parse(buf);
        } catch (const json::exception& e) {
            fail(path, lineno, e.what());
        }
        scenes.push_back(parse_scene(j, path, lineno));
    }
    return scenes;
}

void write_scenes_jsonl(const std::string& path, const std::vector<Scene>& scenes) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open scene file for writing: " + path);
    for (const auto& s : scenes) {
        json j;
        j["scene_id"] = s.scene_id;
        j["image_size"] = json::array({s.image_size[0], s.image_size[1]});
        json gts = json::array();
        for (const auto& g : s.ground_truths)
            gts.push_back(json{{"box", box_json(g.box)}, {"category", g.category}});
        j["ground_truths"] = std::move(gts);
        json dets = json::array();
        for (const auto& d : s.detections)
            dets.push_back(json{{"box", box_json(d.box)}, {"score", d.score}, {"category", d.category}});
        j["detections"] = std::move(dets);
        out << j.dump() << '\n';
    }
    if (!out) throw InputError("failed writing scene file: " + path);
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& origin, const std::string& section) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw InputError(origin + ": unknown key \"" + key + "\" in " + section);
    }
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw InputError(origin + ": config must be a JSON object");
    reject_unknown(j, {"selector", "greedy", "filter", "synth", "paths"}, origin, "config");

    PipelineConfig cfg;
    if (j.contains("selector")) {
        const auto& s = j.at("selector");
        reject_unknown(s, {"mode", "k", "nms_iou"}, origin, "selector");
        if (s.contains("mode")) {
            const std::string mode = s.at("mode").get<std::string>();
            if (mode == "topk") cfg.selector.mode = SelectorMode::topk;
            else if (mode == "nms") cfg.selector.mode = SelectorMode::nms;
            else throw InputError(origin + ": selector.mode must be \"topk\" or \"nms\"");
        }
        opt(s, "k", cfg.selector.k);
        opt(s, "nms_iou", cfg.selector.nms_iou);
        if (cfg.selector.k < 1) throw InputError(origin + ": selector.k must be >= 1");
    }
    if (j.contains("greedy")) {
        const auto& g = j.at("greedy");
        reject_unknown(g, {"theta", "iou_floor", "weights"}, origin, "greedy");
        opt(g, "theta", cfg.greedy.theta);
        opt(g, "iou_floor", cfg.greedy.iou_floor);
        if (g.contains("weights")) {
            const auto& w = g.at("weights");
            reject_unknown(w, {"w_category", "w_l1", "w_giou"}, origin, "greedy.weights");
            opt(w, "w_category", cfg.greedy.weights.w_category);
            opt(w, "w_l1", cfg.greedy.weights.w_l1);
            opt(w, "w_giou", cfg.greedy.weights.w_giou);
        }
        if (cfg.greedy.iou_floor < 0.0 || cfg.greedy.iou_floor > 1.0)
            throw InputError(origin + ": greedy.iou_floor must be in [0,1]");
        if (cfg.greedy.theta < 0) throw InputError(origin + ": greedy.theta must be >= 0");
        const auto& w = cfg.greedy.weights;
        if (w.w_category < 0.0 || w.w_l1 < 0.0 || w.w_giou < 0.0 ||
            (w.w_category == 0.0 && w.w_l1 == 0.0 && w.w_giou == 0.0))
            throw InputError(origin + ": greedy.weights must be non-negative and not all zero");
    }
    if (j.contains("filter")) {
        const auto& f = j.at("filter");
        reject_unknown(f,
                       {"conf_threshold", "alpha", "gamma", "learning_rate", "epochs", "seed",
                        "d", "hidden", "embed_dim", "max_rank", "use_rank_embedding"},
                       origin, "filter");
        opt(f, "conf_threshold", cfg.filter.conf_threshold);
        opt(f, "alpha", cfg.filter.alpha);
        opt(f, "gamma", cfg.filter.gamma);
        opt(f, "learning_rate", cfg.filter.learning_rate);
        opt(f, "epochs", cfg.filter.epochs);
        opt(f, "seed", cfg.filter.seed);
        opt(f, "d", cfg.filter.d);
        opt(f, "hidden", cfg.filter.hidden);
        opt(f, "embed_dim", cfg.filter.embed_dim);
        opt(f, "max_rank", cfg.filter.max_rank);
        opt(f, "use_rank_embedding", cfg.filter.use_rank_embedding);
        if (cfg.filter.conf_threshold < 0.0 || cfg.filter.conf_threshold > 1.0)
            throw InputError(origin + ": filter.conf_threshold must be in [0,1]");
        if (cfg.filter.gamma < 0.0) throw InputError(origin + ": filter.gamma must be >= 0");
        if (cfg.filter.alpha <= 0.0 || cfg.filter.alpha >= 1.0)
            throw InputError(origin + ": filter.alpha must be in (0,1)");
        if (cfg.filter.d < 1 || cfg.filter.hidden < 1 || cfg.filter.embed_dim < 1 ||
            cfg.filter.max_rank < 1)
            throw InputError(origin + ": filter dims must be positive");
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        reject_unknown(s,
                       {"n_gts", "categories", "gt_overlap", "dups_per_gt", "jitter_sigma",
                        "score_iou_corr", "fp_rate", "seed", "n_scenes"},
                       origin, "synth");
        opt(s, "n_gts", cfg.synth.n_gts);
        opt(s, "categories", cfg.synth.categories);
        opt(s, "gt_overlap", cfg.synth.gt_overlap);
        opt(s, "dups_per_gt", cfg.synth.dups_per_gt);
        opt(s, "jitter_sigma", cfg.synth.jitter_sigma);
        opt(s, "score_iou_corr", cfg.synth.score_iou_corr);
        opt(s, "fp_rate", cfg.synth.fp_rate);
        opt(s, "seed", cfg.synth.seed);
        opt(s, "n_scenes", cfg.n_scenes);
        if (cfg.synth.n_gts < 0 || cfg.synth.dups_per_gt < 0 || cfg.synth.categories < 1)
            throw InputError(origin + ": synth counts must be non-negative (categories >= 1)");
        if (cfg.synth.gt_overlap < 0.0 || cfg.synth.gt_overlap >= 1.0)
            throw InputError(origin + ": synth.gt_overlap must be in [0,1)");
        if (cfg.synth.jitter_sigma < 0.0 || cfg.synth.fp_rate < 0.0)
            throw InputError(origin + ": synth scales must be non-negative");
        if (cfg.synth.score_iou_corr < -1.0 || cfg.synth.score_iou_corr > 1.0)
            throw InputError(origin + ": synth.score_iou_corr must be in [-1,1]");
        if (cfg.n_scenes < 1) throw InputError(origin + ": synth.n_scenes must be >= 1");
    }
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        reject_unknown(p, {"scenes", "checkpoint", "output"}, origin, "paths");
        opt(p, "scenes", cfg.paths.scenes);
        opt(p, "checkpoint", cfg.paths.checkpoint);
        opt(p, "output", cfg.paths.output);
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_pipeline_config(os.str(), path);
}

std::string format_sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_metrics_csv(const std::string& path, const PrMetrics& metrics) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open metrics file for writing: " + path);
    out << "scene_count,ap,ap50,ap75,recall,ideal_recall\n";
    if (metrics.scene_count > 0) {
        out << metrics.scene_count << ',' << format_sig6(metrics.ap) << ','
            << format_sig6(metrics.ap50) << ',' << format_sig6(metrics.ap75) << ','
            << format_sig6(metrics.recall) << ',' << format_sig6(metrics.ideal_recall) << '\n';
    }
    if (!out) throw InputError("failed writing metrics file: " + path);
}

void write_sweep_csv(const std::string& path, SweepAxis axis,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open sweep file for writing: " + path);
    out << "axis,value,nms_ap,nms_recall,nms_ideal_recall,"
           "greedy_ap,greedy_recall,greedy_ideal_recall\n";
    const std::string name = sweep_axis_name(axis);
    for (const auto& r : rows) {
        out << name << ',' << format_sig6(r.value) << ',' << format_sig6(r.nms_ap) << ','
            << format_sig6(r.nms_recall) << ',' << format_sig6(r.nms_ideal_recall) << ','
            << format_sig6(r.greedy_ap) << ',' << format_sig6(r.greedy_recall) << ','
            << format_sig6(r.greedy_ideal_recall) << '\n';
    }
    if (!out) throw InputError("failed writing sweep file: " + path);
}

void write_labels_jsonl(const std::string& path, const std::vector<Scene>& scenes,
                        const std::vector<std::vector<int>>& pools,
                        const std::vector<LabelAssignment>& labels) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open label file for writing: " + path);
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        json j;
        j["scene_id"] = scenes[s].scene_id;
        json entries = json::array();
        for (std::size_t i = 0; i < pools[s].size(); ++i) {
            const DetectionLabel& l = labels[s][i];
            entries.push_back(json{{"detection", pools[s][i]},
                                   {"assigned_gt", l.assigned_gt},
                                   {"keep", l.keep ? 1 : 0},
                                   {"demoted", l.demoted},
                                   {"rank", l.rank}});
        }
        j["labels"] = std::move(entries);
        out << j.dump() << '\n';
    }
    if (!out) throw InputError("failed writing label file: " + path);
}

}  // namespace boxmatch
