#include "boxmatch/filter_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "boxmatch/errors.hpp"
#include "boxmatch/rng.hpp"

namespace boxmatch {

namespace {

constexpr double kProbClamp = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_prob(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// d(focal)/dp at the clamped probability
double focal_loss_dp(double p, int label, double alpha, double gamma) {
    p = clamp_prob(p);
    if (label != 0) {
        double g = -alpha * std::pow(1.0 - p, gamma) / p;
        if (gamma > 0.0)
            g += alpha * gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p);
        return g;
    }
    double g = (1.0 - alpha) * std::pow(p, gamma) / (1.0 - p);
    if (gamma > 0.0)
        g -= (1.0 - alpha) * gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
    return g;
}

struct ForwardCache {
    Mat x;       // n x d features
    Mat q, k, v; // n x d
    Mat attn;    // n x n softmax rows
    Mat out;     // n x d attention output
    Mat res;     // n x d residual sum
    Mat u;       // n x hidden tanh activations
    std::vector<double> z;  // n logits
    std::vector<double> p;  // n probabilities
};

// y[i] = M . x_row for every row
void project_rows(const Mat& m, const Mat& x, Mat& y) {
    for (int i = 0; i < x.rows; ++i) {
        for (int r = 0; r < m.rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < m.cols; ++c) s += m(r, c) * x(i, c);
            y(i, r) = s;
        }
    }
}

void forward_from_features(const FilterParams& params, const Mat& features, ForwardCache& fc) {
    const int n = features.rows;
    const int d = params.d;
    const int hidden = params.hidden;
    fc.x = features;
    fc.q = Mat(n, d);
    fc.k = Mat(n, d);
    fc.v = Mat(n, d);
    project_rows(params.wq, fc.x, fc.q);
    project_rows(params.wk, fc.x, fc.k);
    project_rows(params.wv, fc.x, fc.v);

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    fc.attn = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        double maxv = -1e300;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += fc.q(i, c) * fc.k(j, c);
            fc.attn(i, j) = s * scale;
            maxv = std::max(maxv, fc.attn(i, j));
        }
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            fc.attn(i, j) = std::exp(fc.attn(i, j) - maxv);
            denom += fc.attn(i, j);
        }
        for (int j = 0; j < n; ++j) fc.attn(i, j) /= denom;
    }

    fc.out = Mat(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < d; ++c) fc.out(i, c) += fc.attn(i, j) * fc.v(j, c);

    Mat proj(n, d);
    project_rows(params.wo, fc.out, proj);
    fc.res = Mat(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) fc.res(i, c) = fc.x(i, c) + proj(i, c);

    fc.u = Mat(n, hidden);
    fc.z.assign(n, 0.0);
    fc.p.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < hidden; ++r) {
            double s = params.b1[r];
            for (int c = 0; c < d; ++c) s += params.w1(r, c) * fc.res(i, c);
            fc.u(i, r) = std::tanh(s);
        }
        double z = params.b2;
        for (int r = 0; r < hidden; ++r) z += params.w2[r] * fc.u(i, r);
        fc.z[i] = z;
        fc.p[i] = sigmoid(z);
    }
}

FilterGrads zero_grads(const FilterParams& params) {
    FilterGrads g;
    g.d = params.d;
    g.hidden = params.hidden;
    g.f = params.f;
    g.emb = RankEmbedding(params.emb.max_rank, params.emb.embed_dim);
    g.w_in = Mat(params.d, params.f);
    g.wq = Mat(params.d, params.d);
    g.wk = Mat(params.d, params.d);
    g.wv = Mat(params.d, params.d);
    g.wo = Mat(params.d, params.d);
    g.w1 = Mat(params.hidden, params.d);
    g.b1.assign(params.hidden, 0.0);
    g.w2.assign(params.hidden, 0.0);
    g.b2 = 0.0;
    return g;
}

}  // namespace

std::vector<double> raw_features(const Detection& det) {
    std::vector<double> raw(kRawFeatureSize, 0.0);
    raw[0] = det.box.cx;
    raw[1] = det.box.cy;
    raw[2] = det.box.w;
    raw[3] = det.box.h;
    raw[4] = det.score;
    const int slot = det.category >= 0 && det.category < kCategoryOneHotCap
                         ? det.category
                         : kCategoryOneHotCap;
    raw[5 + slot] = 1.0;
    return raw;
}

std::vector<double> featurize(const FilterParams& params, const Detection& det, int rank) {
    if (rank < 0) throw std::invalid_argument("featurize: negative rank");
    const auto raw = raw_features(det);
    std::vector<double> x(params.d, 0.0);
    for (int r = 0; r < params.d; ++r) {
        double s = 0.0;
        for (int c = 0; c < params.f; ++c) s += params.w_in(r, c) * raw[c];
        x[r] = s;
    }
    const double* e = params.emb.row(rank);
    const int ncopy = std::min(params.emb.embed_dim, params.d);
    for (int c = 0; c < ncopy; ++c) x[c] += e[c];
    return x;
}

Mat filter_features(const FilterParams& params, const std::vector<Detection>& pool,
                    const std::vector<int>& ranks) {
    if (pool.size() != ranks.size())
        throw std::invalid_argument("filter_features: pool/ranks size mismatch");
    Mat x(static_cast<int>(pool.size()), params.d);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto xi = featurize(params, pool[i], ranks[i]);
        std::copy(xi.begin(), xi.end(), x.row(static_cast<int>(i)));
    }
    return x;
}

std::vector<double> filter_forward(const FilterParams& params, const Mat& features) {
    if (features.rows < 1) throw std::invalid_argument("filter_forward: empty feature matrix");
    if (features.cols != params.d)
        throw std::invalid_argument("filter_forward: feature width does not match model d");
    ForwardCache fc;
    forward_from_features(params, features, fc);
    return fc.p;
}

double focal_loss(double p, int label, double alpha, double gamma) {
    p = clamp_prob(p);
    if (label != 0) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
    return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double filter_backward(const FilterParams& params, const std::vector<Detection>& pool,
                       const std::vector<int>& ranks, const std::vector<int>& labels,
                       const FilterConfig& cfg, FilterGrads& grads) {
    const int n = static_cast<int>(pool.size());
    if (n == 0) throw std::invalid_argument("filter_backward: empty pool");
    if (ranks.size() != pool.size() || labels.size() != pool.size())
        throw std::invalid_argument("filter_backward: ranks/labels size mismatch");

    const int d = params.d;
    const int hidden = params.hidden;
    const Mat features = filter_features(params, pool, ranks);
    ForwardCache fc;
    forward_from_features(params, features, fc);

    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += focal_loss(fc.p[i], labels[i], cfg.alpha, cfg.gamma);
    loss /= n;

    grads = zero_grads(params);

    // head
    std::vector<double> g_z(n);
    Mat g_res(n, d);
    for (int i = 0; i < n; ++i) {
        const double dp = focal_loss_dp(fc.p[i], labels[i], cfg.alpha, cfg.gamma);
        g_z[i] = dp * fc.p[i] * (1.0 - fc.p[i]) / n;
        grads.b2 += g_z[i];
        for (int r = 0; r < hidden; ++r) {
            grads.w2[r] += g_z[i] * fc.u(i, r);
            const double g_pre = g_z[i] * params.w2[r] * (1.0 - fc.u(i, r) * fc.u(i, r));
            grads.b1[r] += g_pre;
            for (int c = 0; c < d; ++c) {
                grads.w1(r, c) += g_pre * fc.res(i, c);
                g_res(i, c) += g_pre * params.w1(r, c);
            }
        }
    }

    // residual: g_res flows to x directly and through the attention block
    Mat g_x = g_res;
    Mat g_out(n, d);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < d; ++r) {
            const double g_proj = g_res(i, r);
            for (int c = 0; c < d; ++c) {
                grads.wo(r, c) += g_proj * fc.out(i, c);
                g_out(i, c) += g_proj * params.wo(r, c);
            }
        }
    }

    // attention: out = A . V
    Mat g_attn(n, n);
    Mat g_v(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += g_out(i, c) * fc.v(j, c);
            g_attn(i, j) = s;
            for (int c = 0; c < d; ++c) g_v(j, c) += fc.attn(i, j) * g_out(i, c);
        }
    }

    // softmax rows
    Mat g_scores(n, n);
    for (int i = 0; i < n; ++i) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += fc.attn(i, j) * g_attn(i, j);
        for (int j = 0; j < n; ++j)
            g_scores(i, j) = fc.attn(i, j) * (g_attn(i, j) - dot);
    }

    // scores = Q . K^T / sqrt(d)
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Mat g_q(n, d), g_k(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double g_s = g_scores(i, j) * scale;
            for (int c = 0; c < d; ++c) {
                g_q(i, c) += g_s * fc.k(j, c);
                g_k(j, c) += g_s * fc.q(i, c);
            }
        }
    }

    // projections q = Wq x, k = Wk x, v = Wv x
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                grads.wq(r, c) += g_q(i, r) * fc.x(i, c);
                grads.wk(r, c) += g_k(i, r) * fc.x(i, c);
                grads.wv(r, c) += g_v(i, r) * fc.x(i, c);
                g_x(i, c) += g_q(i, r) * params.wq(r, c) + g_k(i, r) * params.wk(r, c) +
                             g_v(i, r) * params.wv(r, c);
            }
        }
    }

    // featurize: x = W_in raw + padded embedding row
    const int ncopy = std::min(params.emb.embed_dim, d);
    for (int i = 0; i < n; ++i) {
        const auto raw = raw_features(pool[i]);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < params.f; ++c) grads.w_in(r, c) += g_x(i, r) * raw[c];
        double* g_row = grads.emb.row(ranks[i]);
        for (int c = 0; c < ncopy; ++c) g_row[c] += g_x(i, c);
    }
    return loss;
}

FilterParams init_filter_params(const FilterConfig& cfg) {
    FilterParams p;
    p.d = cfg.d;
    p.hidden = cfg.hidden;
    p.f = kRawFeatureSize;
    p.emb = RankEmbedding(cfg.max_rank, cfg.embed_dim);
    p.w_in = Mat(cfg.d, p.f);
    p.wq = Mat(cfg.d, cfg.d);
    p.wk = Mat(cfg.d, cfg.d);
    p.wv = Mat(cfg.d, cfg.d);
    p.wo = Mat(cfg.d, cfg.d);
    p.w1 = Mat(cfg.hidden, cfg.d);
    p.b1.assign(cfg.hidden, 0.0);
    p.w2.assign(cfg.hidden, 0.0);
    p.b2 = 0.0;

    CounterRng rng(cfg.seed, 0);
    auto fill = [&](Mat& m, double scale) {
        for (double& v : m.a) v = rng.uniform(-scale, scale);
    };
    fill(p.w_in, std::sqrt(1.0 / p.f));
    fill(p.wq, std::sqrt(1.0 / cfg.d));
    fill(p.wk, std::sqrt(1.0 / cfg.d));
    fill(p.wv, std::sqrt(1.0 / cfg.d));
    fill(p.wo, std::sqrt(1.0 / cfg.d));
    fill(p.w1, std::sqrt(1.0 / cfg.d));
    const double s2 = std::sqrt(1.0 / cfg.hidden);
    for (double& v : p.w2) v = rng.uniform(-s2, s2);
    if (cfg.use_rank_embedding) {
        for (double& v : p.emb.table) v = rng.uniform(-0.05, 0.05);
    }
    return p;
}

TrainResult train_filter(const std::vector<SceneExample>& dataset, const FilterConfig& cfg) {
    if (dataset.empty()) throw InputError("train_filter: empty dataset");
    TrainResult result;
    result.params = init_filter_params(cfg);
    FilterParams& params = result.params;

    FilterGrads grads;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        int counted = 0;
        for (const auto& ex : dataset) {
            if (ex.pool.empty()) continue;
            loss_sum += filter_backward(params, ex.pool, ex.ranks, ex.labels, cfg, grads);
            ++counted;
            const double lr = cfg.learning_rate;
            for (std::size_t i = 0; i < params.w_in.a.size(); ++i) params.w_in.a[i] -= lr * grads.w_in.a[i];
            for (std::size_t i = 0; i < params.wq.a.size(); ++i) params.wq.a[i] -= lr * grads.wq.a[i];
            for (std::size_t i = 0; i < params.wk.a.size(); ++i) params.wk.a[i] -= lr * grads.wk.a[i];
            for (std::size_t i = 0; i < params.wv.a.size(); ++i) params.wv.a[i] -= lr * grads.wv.a[i];
            for (std::size_t i = 0; i < params.wo.a.size(); ++i) params.wo.a[i] -= lr * grads.wo.a[i];
            for (std::size_t i = 0; i < params.w1.a.size(); ++i) params.w1.a[i] -= lr * grads.w1.a[i];
            for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * grads.b1[i];
            for (std::size_t i = 0; i < params.w2.size(); ++i) params.w2[i] -= lr * grads.w2[i];
            params.b2 -= lr * grads.b2;
            if (cfg.use_rank_embedding) {
                for (std::size_t i = 0; i < params.emb.table.size(); ++i)
                    params.emb.table[i] -= lr * grads.emb.table[i];
            }
        }
        if (counted == 0) throw InputError("train_filter: every scene has an empty pool");
        result.loss_trace.push_back(loss_sum / counted);
    }
    return result;
}

std::vector<Detection> apply_filter(const FilterParams& params,
                                    const std::vector<Detection>& pool,
                                    const FilterConfig& cfg) {
    if (pool.empty()) return {};
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = pool[i].score;
    const auto ranks = rank_indices(scores);
    const Mat features = filter_features(params, pool, ranks);
    const auto probs = filter_forward(params, features);
    std::vector<Detection> kept;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double final_score = pool[i].score * probs[i];
        if (final_score > cfg.conf_threshold) {
            Detection d = pool[i];
            d.score = final_score;
            kept.push_back(d);
        }
    }
    return kept;
}

namespace {

void put_i32(std::ofstream& out, std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int32_t get_i32(std::ifstream& in) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void put_array(std::ofstream& out, const double* data, std::int32_t rows, std::int32_t cols) {
    put_i32(out, rows);
    put_i32(out, cols);
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(sizeof(double)) * rows * cols);
}

void get_array(std::ifstream& in, double* data, std::int32_t rows, std::int32_t cols,
               const char* name) {
    const std::int32_t r = get_i32(in);
    const std::int32_t c = get_i32(in);
    if (r != rows || c != cols) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "checkpoint: %s has shape %dx%d, expected %dx%d",
                      name, r, c, rows, cols);
        throw InputError(buf);
    }
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(sizeof(double)) * rows * cols);
    if (!in) throw InputError(std::string("checkpoint: truncated array ") + name);
}

constexpr char kMagic[4] = {'B', 'X', 'M', 'F'};

}  // namespace

void save_filter_params(const FilterParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    put_i32(out, 1);  // version
    put_i32(out, params.d);
    put_i32(out, params.hidden);
    put_i32(out, params.f);
    put_i32(out, params.emb.embed_dim);
    put_i32(out, params.emb.max_rank);
    put_array(out, params.w_in.a.data(), params.d, params.f);
    put_array(out, params.wq.a.data(), params.d, params.d);
    put_array(out, params.wk.a.data(), params.d, params.d);
    put_array(out, params.wv.a.data(), params.d, params.d);
    put_array(out, params.wo.a.data(), params.d, params.d);
    put_array(out, params.w1.a.data(), params.hidden, params.d);
    put_array(out, params.b1.data(), params.hidden, 1);
    put_array(out, params.w2.data(), 1, params.hidden);
    put_array(out, &params.b2, 1, 1);
    put_array(out, params.emb.table.data(), params.emb.max_rank, params.emb.embed_dim);
    if (!out) throw InputError("failed writing checkpoint: " + path);
}

FilterParams load_filter_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw InputError("not a filter checkpoint: " + path);
    const std::int32_t version = get_i32(in);
    if (version != 1) throw InputError("unsupported checkpoint version: " + path);
    FilterParams p;
    p.d = get_i32(in);
    p.hidden = get_i32(in);
    p.f = get_i32(in);
    const std::int32_t embed_dim = get_i32(in);
    const std::int32_t max_rank = get_i32(in);
    if (p.d < 1 || p.hidden < 1 || p.f != kRawFeatureSize || embed_dim < 1 || max_rank < 1)
        throw InputError("checkpoint has invalid dimensions: " + path);
    p.emb = RankEmbedding(max_rank, embed_dim);
    p.w_in = Mat(p.d, p.f);
    p.wq = Mat(p.d, p.d);
    p.wk = Mat(p.d, p.d);
    p.wv = Mat(p.d, p.d);
    p.wo = Mat(p.d, p.d);
    p.w1 = Mat(p.hidden, p.d);
    p.b1.assign(p.hidden, 0.0);
    p.w2.assign(p.hidden, 0.0);
    get_array(in, p.w_in.a.data(), p.d, p.f, "w_in");
    get_array(in, p.wq.a.data(), p.d, p.d, "wq");
    get_array(in, p.wk.a.data(), p.d, p.d, "wk");
    get_array(in, p.wv.a.data(), p.d, p.d, "wv");
    get_array(in, p.wo.a.data(), p.d, p.d, "wo");
    get_array(in, p.w1.a.data(), p.hidden, p.d, "w1");
    get_array(in, p.b1.data(), p.hidden, 1, "b1");
    get_array(in, p.w2.data(), 1, p.hidden, "w2");
    get_array(in, &p.b2, 1, 1, "b2");
    get_array(in, p.emb.table.data(), max_rank, embed_dim, "emb");
    return p;
}

std::vector<double> flatten_params(const FilterParams& params) {
    std::vector<double> flat;
    auto push = [&](const double* d, std::size_t n) { flat.insert(flat.end(), d, d + n); };
    push(params.w_in.a.data(), params.w_in.a.size());
    push(params.wq.a.data(), params.wq.a.size());
    push(params.wk.a.data(), params.wk.a.size());
    push(params.wv.a.data(), params.wv.a.size());
    push(params.wo.a.data(), params.wo.a.size());
    push(params.w1.a.data(), params.w1.a.size());
    push(params.b1.data(), params.b1.size());
    push(params.w2.data(), params.w2.size());
    push(&params.b2, 1);
    push(params.emb.table.data(), params.emb.table.size());
    return flat;
}

void unflatten_params(FilterParams& params, const std::vector<double>& flat) {
    std::size_t off = 0;
    auto pull = [&](double* d, std::size_t n) {
        std::copy(flat.begin() + off, flat.begin() + off + n, d);
        off += n;
    };
    pull(params.w_in.a.data(), params.w_in.a.size());
    pull(params.wq.a.data(), params.wq.a.size());
    pull(params.wk.a.data(), params.wk.a.size());
    pull(params.wv.a.data(), params.wv.a.size());
    pull(params.wo.a.data(), params.wo.a.size());
    pull(params.w1.a.data(), params.w1.a.size());
    pull(params.b1.data(), params.b1.size());
    pull(params.w2.data(), params.w2.size());
    pull(&params.b2, 1);
    pull(params.emb.table.data(), params.emb.table.size());
    if (off != flat.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

}  // namespace boxmatch
