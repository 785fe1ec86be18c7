#include "boxmatch/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boxmatch {

double pair_cost(const Detection& d, const GroundTruth& g, const CostWeights& w) {
    const double category_cost =
        d.category == g.category ? (1.0 - d.score) : (1.0 + d.score);
    const double l1 = std::abs(d.box.cx - g.box.cx) + std::abs(d.box.cy - g.box.cy) +
                      std::abs(d.box.w - g.box.w) + std::abs(d.box.h - g.box.h);
    return w.w_category * category_cost + w.w_l1 * l1 + w.w_giou * (1.0 - giou(d.box, g.box));
}

namespace {

// Jonker-Volgenant style shortest augmenting path solver on an n x n matrix.
// col_to_row/row_to_col describe the perfect matching; u, v are the optimal
// dual potentials.
void solve_square(int n, const std::vector<double>& cost,
                  std::vector<int>& row_to_col, std::vector<int>& col_to_row,
                  std::vector<double>& u, std::vector<double>& v) {
    const double inf = std::numeric_limits<double>::infinity();
    u.assign(n + 1, 0.0);
    v.assign(n + 1, 0.0);
    std::vector<int> p(n + 1, 0);  // p[j]: row matched to col j (1-based)
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * static_cast<std::size_t>(n) + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    row_to_col.assign(n, -1);
    col_to_row.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) {
            row_to_col[p[j] - 1] = j - 1;
            col_to_row[j - 1] = p[j] - 1;
        }
    }
}

// Alternating-path reachability: with blocked rows/cols removed, can the free
// row reach the free col through the tight graph, alternating unmatched and
// matched edges? Flips the matching along the path when found.
bool reroute(int free_row, int target_col, const std::vector<std::vector<int>>& tight,
             std::vector<int>& row_to_col, std::vector<int>& col_to_row,
             const std::vector<char>& row_used, const std::vector<char>& col_used) {
    const int n = static_cast<int>(tight.size());
    std::vector<int> prev_row_of_col(n, -1);
    std::vector<char> col_seen(n, 0);
    std::vector<char> row_seen(n, 0);
    row_seen[free_row] = 1;
    std::vector<int> bfs{free_row};
    for (std::size_t qi = 0; qi < bfs.size(); ++qi) {
        const int r = bfs[qi];
        for (int c : tight[r]) {
            if (col_used[c] || col_seen[c]) continue;
            col_seen[c] = 1;
            prev_row_of_col[c] = r;
            if (c == target_col) {
                // unwind: shift each path row onto the col it reached
                int cc = c;
                while (true) {
                    const int rr = prev_row_of_col[cc];
                    const int next_c = row_to_col[rr];
                    row_to_col[rr] = cc;
                    col_to_row[cc] = rr;
                    if (rr == free_row) break;
                    cc = next_c;
                }
                return true;
            }
            const int r2 = col_to_row[c];
            if (r2 >= 0 && !row_used[r2] && !row_seen[r2]) {
                row_seen[r2] = 1;
                bfs.push_back(r2);
            }
        }
    }
    return false;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n_rows = static_cast<int>(cost.size());
    const int n_cols = n_rows > 0 ? static_cast<int>(cost[0].size()) : 0;
    if (n_rows == 0 || n_cols == 0) return {};

    double max_abs = 0.0;
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != n_cols)
            throw std::invalid_argument("hungarian: ragged cost matrix");
        for (double c : row) {
            if (!std::isfinite(c)) throw std::invalid_argument("hungarian: non-finite cost entry");
            max_abs = std::max(max_abs, std::abs(c));
        }
    }

    // pad to square with zeros; dummies absorb the unmatched side exactly
    const int n = std::max(n_rows, n_cols);
    std::vector<double> sq(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c) sq[static_cast<std::size_t>(r) * n + c] = cost[r][c];

    std::vector<int> row_to_col, col_to_row;
    std::vector<double> u, v;
    solve_square(n, sq, row_to_col, col_to_row, u, v);

    // Lexicographic tie-break: restrict to edges with zero reduced cost and
    // greedily force the smallest (row, col) pair that keeps the tight graph
    // perfectly matchable.
    const double eps = 1e-12 * (1.0 + max_abs);
    std::vector<std::vector<int>> tight(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (sq[static_cast<std::size_t>(r) * n + c] - u[r + 1] - v[c + 1] <= eps)
                tight[r].push_back(c);
        }
        if (std::find(tight[r].begin(), tight[r].end(), row_to_col[r]) == tight[r].end()) {
            tight[r].push_back(row_to_col[r]);  // matched edges are tight up to rounding
            std::sort(tight[r].begin(), tight[r].end());
        }
    }

    std::vector<char> row_used(n, 0), col_used(n, 0);
    for (int r = 0; r < n_rows; ++r) {
        for (int c : tight[r]) {
            if (c >= n_cols || col_used[c]) continue;  // only real, free columns
            if (row_to_col[r] == c) break;             // already lexicographically settled
            // try to give col c to row r, re-routing c's current owner to r's col
            const int old_col = row_to_col[r];
            const int owner = col_to_row[c];
            row_to_col[r] = c;
            col_to_row[c] = r;
            row_to_col[owner] = -1;
            col_to_row[old_col] = -1;
            std::vector<char> row_block = row_used;
            std::vector<char> col_block = col_used;
            row_block[r] = 1;
            col_block[c] = 1;
            if (reroute(owner, old_col, tight, row_to_col, col_to_row, row_block, col_block)) break;
            // restore
            row_to_col[r] = old_col;
            col_to_row[old_col] = r;
            row_to_col[owner] = c;
            col_to_row[c] = owner;
        }
        row_used[r] = 1;
        if (row_to_col[r] >= 0) col_used[row_to_col[r]] = 1;
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(std::min(n_rows, n_cols));
    for (int r = 0; r < n_rows; ++r) {
        if (row_to_col[r] < n_cols) pairs.emplace_back(r, row_to_col[r]);
    }
    return pairs;
}

std::vector<int> one_to_one_targets(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    const CostWeights& w) {
    if (dets.empty()) throw std::invalid_argument("one_to_one_targets: empty detection list");
    std::vector<int> targets(dets.size(), -1);
    if (gts.empty()) return targets;
    std::vector<std::vector<double>> cost(dets.size(), std::vector<double>(gts.size()));
    for (std::size_t i = 0; i < dets.size(); ++i)
        for (std::size_t j = 0; j < gts.size(); ++j) cost[i][j] = pair_cost(dets[i], gts[j], w);
    for (const auto& [r, c] : hungarian(cost)) targets[r] = c;
    return targets;
}

LabelAssignment greedy_match(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts,
                             const std::vector<int>& ranks,
                             const GreedyMatchConfig& cfg) {
    const int n = static_cast<int>(dets.size());
    if (static_cast<int>(ranks.size()) != n)
        throw std::invalid_argument("greedy_match: ranks size does not match detections");
    {
        std::vector<char> seen(n, 0);
        for (int r : ranks) {
            if (r < 0 || r >= n || seen[r])
                throw std::invalid_argument("greedy_match: ranks is not a permutation of 0..n-1");
            seen[r] = 1;
        }
    }

    LabelAssignment labels(n);
    for (int i = 0; i < n; ++i) labels[i].rank = ranks[i];
    if (gts.empty()) return labels;

    // cluster: independent per-detection argmin of the matching cost
    std::vector<double> best_iou(n, 0.0);
    for (int i = 0; i < n; ++i) {
        int best_g = 0;
        double best_cost = pair_cost(dets[i], gts[0], cfg.weights);
        for (int g = 1; g < static_cast<int>(gts.size()); ++g) {
            const double c = pair_cost(dets[i], gts[g], cfg.weights);
            if (c < best_cost) {
                best_cost = c;
                best_g = g;
            }
        }
        labels[i].assigned_gt = best_g;
        best_iou[i] = iou(dets[i].box, gts[best_g].box);
        labels[i].demoted = best_iou[i] < cfg.iou_floor && ranks[i] < cfg.theta;
    }

    // retain the best-ranked eligible member per cluster
    std::vector<int> winner(gts.size(), -1);
    for (int i = 0; i < n; ++i) {
        if (labels[i].demoted || best_iou[i] < cfg.iou_floor) continue;
        int& w = winner[labels[i].assigned_gt];
        if (w < 0 || ranks[i] < ranks[w]) w = i;
    }
    for (int w : winner) {
        if (w >= 0) labels[w].keep = true;
    }
    return labels;
}

}  // namespace boxmatch
