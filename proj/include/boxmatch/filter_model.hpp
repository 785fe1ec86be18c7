#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boxmatch/ranking.hpp"
#include "boxmatch/types.hpp"

namespace boxmatch {

// Dense row-major matrix, just large enough for the filter model.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
};

// raw candidate vector: [cx, cy, w, h, score, one-hot category]
constexpr int kCategoryOneHotCap = 8;  // categories >= cap share an overflow slot
constexpr int kRawFeatureSize = 5 + kCategoryOneHotCap + 1;

struct FilterConfig {
    double conf_threshold = 0.1;
    double alpha = 0.25;
    double gamma = 2.0;
    double learning_rate = 1.0;
    int epochs = 200;
    std::uint64_t seed = 1;
    int d = 32;          // model width
    int hidden = 32;     // feed-forward hidden width
    int embed_dim = 32;
    int max_rank = 300;
    bool use_rank_embedding = true;  // false: table zeroed and frozen
};

// All trainable state: rank-embedding table, input projection, one
// self-attention layer, and the keep head.
struct FilterParams {
    int d = 0;
    int hidden = 0;
    int f = kRawFeatureSize;
    RankEmbedding emb;
    Mat w_in;               // d x f
    Mat wq, wk, wv, wo;     // d x d
    Mat w1;                 // hidden x d
    std::vector<double> b1; // hidden
    std::vector<double> w2; // hidden
    double b2 = 0.0;
};

using FilterGrads = FilterParams;

std::vector<double> raw_features(const Detection& det);

// Projected raw features plus the (padded/truncated) rank-embedding row.
std::vector<double> featurize(const FilterParams& params, const Detection& det, int rank);

// n x d feature matrix for a candidate pool.
Mat filter_features(const FilterParams& params, const std::vector<Detection>& pool,
                    const std::vector<int>& ranks);

// Keep probabilities: scaled dot-product self-attention over the candidates,
// residual add, feed-forward to a scalar, logistic squash.
std::vector<double> filter_forward(const FilterParams& params, const Mat& features);

// label 1: -alpha (1-p)^gamma log p; label 0: -(1-alpha) p^gamma log(1-p).
// p is clamped to [1e-7, 1-1e-7].
double focal_loss(double p, int label, double alpha, double gamma);

// Mean focal loss over the pool and exact analytic gradients of it with
// respect to every parameter, including the input projection and the
// rank-embedding rows reached through featurize.
double filter_backward(const FilterParams& params, const std::vector<Detection>& pool,
                       const std::vector<int>& ranks, const std::vector<int>& labels,
                       const FilterConfig& cfg, FilterGrads& grads);

// One scene's training example: selected pool, rank indices, keep labels.
struct SceneExample {
    std::vector<Detection> pool;
    std::vector<int> ranks;
    std::vector<int> labels;
};

struct TrainResult {
    FilterParams params;
    std::vector<double> loss_trace;  // mean loss per epoch
};

FilterParams init_filter_params(const FilterConfig& cfg);

// Seeded init, then full-batch-per-scene gradient descent for cfg.epochs
// passes over the dataset in order. Deterministic given the seed.
TrainResult train_filter(const std::vector<SceneExample>& dataset, const FilterConfig& cfg);

// Multiplicative score gap: final score = score x keep probability; survivors
// are candidates with final score strictly above cfg.conf_threshold.
std::vector<Detection> apply_filter(const FilterParams& params,
                                    const std::vector<Detection>& pool,
                                    const FilterConfig& cfg);

// Self-describing binary checkpoint; write-then-read is bit-exact.
void save_filter_params(const FilterParams& params, const std::string& path);
FilterParams load_filter_params(const std::string& path);

// Flat parameter vector, fixed order; used by the trainer and gradient tests.
std::vector<double> flatten_params(const FilterParams& params);
void unflatten_params(FilterParams& params, const std::vector<double>& flat);

}  // namespace boxmatch
