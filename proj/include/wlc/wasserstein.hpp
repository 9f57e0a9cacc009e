#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/network.hpp"

namespace wlc {

// Exact minimum-cost assignment (Hungarian algorithm with potentials, O(n^3))
// on a square cost matrix. Returns the optimal total cost.
inline double assignment_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    for (const auto& row : cost)
        if (static_cast<int>(row.size()) != n) throw InvalidData("assignment_cost: matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0) - 1][static_cast<std::size_t>(j) - 1] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1][static_cast<std::size_t>(j) - 1];
    return total;
}

// Plug-in empirical 2-Wasserstein distance between two equal-size sample
// clouds: exact optimal assignment under squared euclidean cost, then
// sqrt(mean matched cost). The plug-in estimator is biased upward at finite
// sample size; the bias is a property of the estimator and is reported as-is,
// not corrected.
inline double empirical_w2(const SampleMatrix& a, const SampleMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw InvalidData("empirical_w2: sample clouds must have equal shape");
    if (a.rows > 2000) throw Unsupported("empirical_w2: more than 2000 points");
    const int n = a.rows;
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (int c = 0; c < a.cols; ++c) {
                const double diff = a.at(i, c) - b.at(j, c);
                d2 += diff * diff;
            }
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d2;
        }
    return std::sqrt(assignment_cost(cost) / static_cast<double>(n));
}

}  // namespace wlc
