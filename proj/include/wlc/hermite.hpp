#pragma once

#include <vector>

namespace wlc {

// Probabilists' Hermite polynomials H_k, three-term recurrence
// H_{k+1}(x) = x H_k(x) - k H_{k-1}(x).
//   H_0 = 1, H_1 = x, H_2 = x^2 - 1, H_3 = x^3 - 3x, ...
inline double hermite_value(int k, double x) {
    if (k == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int n = 1; n < k; ++n) {
        const double next = x * h - static_cast<double>(n) * hm;
        hm = h;
        h = next;
    }
    return h;
}

// Fills out[0..degree] with H_0(x)..H_degree(x).
inline void hermite_values(int degree, double x, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(degree) + 1);
    out[0] = 1.0;
    if (degree >= 1) out[1] = x;
    for (int n = 1; n < degree; ++n)
        out[static_cast<std::size_t>(n) + 1] =
            x * out[static_cast<std::size_t>(n)] - static_cast<double>(n) * out[static_cast<std::size_t>(n) - 1];
}

// Multivariate Hermite polynomial: the tensor factorization
// H_J(x) = H_{j_1}(x_1) ... H_{j_d}(x_d).
inline double hermite_eval(const std::vector<int>& multi_index, const std::vector<double>& x) {
    double p = 1.0;
    for (std::size_t i = 0; i < multi_index.size(); ++i) p *= hermite_value(multi_index[i], x[i]);
    return p;
}

}  // namespace wlc
