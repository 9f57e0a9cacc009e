#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/matrix.hpp"

namespace wlc {

namespace detail {

inline double wick_sum(const std::vector<int>& rest, const SymMatrix& cov,
                       std::map<std::vector<int>, double>& memo) {
    if (rest.empty()) return 1.0;
    // The value only depends on the index multiset, so memoize on the sorted key.
    std::vector<int> key(rest);
    std::sort(key.begin(), key.end());
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    // Pair the first index with each later one; every perfect pairing is
    // enumerated exactly once (not the 2^k k! permutations of Isserlis'
    // classical statement).
    double total = 0.0;
    for (std::size_t j = 1; j < rest.size(); ++j) {
        const double c = cov(rest[0], rest[static_cast<int>(j)]);
        if (c == 0.0) continue;
        std::vector<int> next;
        next.reserve(rest.size() - 2);
        for (std::size_t r = 1; r < rest.size(); ++r)
            if (r != j) next.push_back(rest[r]);
        total += c * wick_sum(next, cov, memo);
    }
    memo.emplace(std::move(key), total);
    return total;
}

}  // namespace detail

// E[X_{i_1} ... X_{i_{2k}}] for X ~ N(0, cov): sum over perfect pairings of
// products of covariance entries. Indices are 0-based and may repeat.
// An odd number of indices raises OddMoment unless allow_odd is set, in which
// case the result is 0 by the symmetry of the centered Gaussian.
inline double isserlis_moment(const SymMatrix& cov, const std::vector<int>& indices,
                              bool allow_odd = false) {
    if (indices.size() % 2 != 0) {
        if (allow_odd) return 0.0;
        throw OddMoment("isserlis_moment: odd number of indices");
    }
    if (indices.size() > 8) throw Unsupported("isserlis_moment: more than 8 indices");
    for (int i : indices)
        if (i < 0 || i >= cov.dim()) throw InvalidData("isserlis_moment: index out of range");
    std::map<std::vector<int>, double> memo;
    return detail::wick_sum(indices, cov, memo);
}

}  // namespace wlc
