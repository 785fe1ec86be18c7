#pragma once

#include <vector>

namespace boxmatch {

// Learned embedding of the confidence-sort position. Ranks at or beyond
// max_rank clamp to the last row.
struct RankEmbedding {
    int max_rank = 0;
    int embed_dim = 0;
    std::vector<double> table;  // row-major, max_rank x embed_dim

    RankEmbedding() = default;
    RankEmbedding(int max_rank_, int embed_dim_)
        : max_rank(max_rank_), embed_dim(embed_dim_),
          table(static_cast<std::size_t>(max_rank_) * embed_dim_, 0.0) {}

    double* row(int r);
    const double* row(int r) const;
};

// Per-detection rank index: 0 is the highest score, ties broken by smaller
// original index. result[i] is detection i's rank; the result is a
// permutation of 0..n-1.
std::vector<int> rank_indices(const std::vector<double>& scores);

// Row min(rank, max_rank-1) of the table.
std::vector<double> rank_embed(int rank, const RankEmbedding& emb);

}  // namespace boxmatch
