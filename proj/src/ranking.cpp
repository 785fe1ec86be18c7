#include "boxmatch/ranking.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace boxmatch {

double* RankEmbedding::row(int r) {
    const int clamped = std::min(std::max(r, 0), max_rank - 1);
    return table.data() + static_cast<std::size_t>(clamped) * embed_dim;
}

const double* RankEmbedding::row(int r) const {
    const int clamped = std::min(std::max(r, 0), max_rank - 1);
    return table.data() + static_cast<std::size_t>(clamped) * embed_dim;
}

std::vector<int> rank_indices(const std::vector<double>& scores) {
    const int n = static_cast<int>(scores.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> ranks(n);
    for (int r = 0; r < n; ++r) ranks[order[r]] = r;
    return ranks;
}

std::vector<double> rank_embed(int rank, const RankEmbedding& emb) {
    if (rank < 0) throw std::invalid_argument("rank_embed: negative rank");
    const double* r = emb.row(rank);
    return std::vector<double>(r, r + emb.embed_dim);
}

}  // namespace boxmatch
