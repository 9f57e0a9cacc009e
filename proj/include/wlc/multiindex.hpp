#pragma once

#include <vector>

namespace wlc {

// The multi-index set M_q^(p) = { J in N_0^p : |J| <= q }, ordered by total
// degree then lexicographically. Entry 0 is always the zero multi-index, the
// next p entries are the unit indices e_1..e_p, then the order-2 indices.
// The same ordering indexes jet components and extended kernel blocks.
inline std::vector<std::vector<int>> multi_index_set(int p, int q) {
    std::vector<std::vector<int>> out;
    out.emplace_back(static_cast<std::size_t>(p), 0);
    if (q >= 1) {
        for (int a = 0; a < p; ++a) {
            std::vector<int> j(static_cast<std::size_t>(p), 0);
            j[static_cast<std::size_t>(a)] = 1;
            out.push_back(j);
        }
    }
    if (q >= 2) {
        for (int a = 0; a < p; ++a) {
            for (int b = a; b < p; ++b) {
                std::vector<int> j(static_cast<std::size_t>(p), 0);
                j[static_cast<std::size_t>(a)] += 1;
                j[static_cast<std::size_t>(b)] += 1;
                out.push_back(j);
            }
        }
    }
    return out;
}

inline int multi_index_order(const std::vector<int>& j) {
    int s = 0;
    for (int v : j) s += v;
    return s;
}

// Position of j in multi_index_set(p, q) ordering, or -1 if absent.
inline int multi_index_position(const std::vector<std::vector<int>>& set, const std::vector<int>& j) {
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set[i] == j) return static_cast<int>(i);
    return -1;
}

}  // namespace wlc
