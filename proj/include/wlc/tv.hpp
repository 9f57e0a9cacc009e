#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wlc/errors.hpp"

namespace wlc {

// Tensor grid for 1-d / 2-d density integration. points_per_axis must be odd
// (composite Simpson). Default desk-scale grid: 4001 points per axis over
// +/- 8 max-stddev.
struct GridSpec {
    std::vector<double> lo;
    std::vector<double> hi;
    int points_per_axis = 4001;

    int dim() const { return static_cast<int>(lo.size()); }
};

inline GridSpec symmetric_grid(int dim, double half_width, int points_per_axis = 4001) {
    GridSpec g;
    g.lo.assign(static_cast<std::size_t>(dim), -half_width);
    g.hi.assign(static_cast<std::size_t>(dim), half_width);
    g.points_per_axis = points_per_axis;
    return g;
}

inline GridSpec default_grid(int dim, double max_stddev, int points_per_axis = 4001) {
    return symmetric_grid(dim, 8.0 * max_stddev, points_per_axis);
}

namespace detail {

inline std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w[0] = w[static_cast<std::size_t>(n) - 1] = h / 3.0;
    for (int i = 1; i + 1 < n; ++i) w[static_cast<std::size_t>(i)] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
    return w;
}

}  // namespace detail

struct TvResult {
    double value = 0.0;
    double error_estimate = 0.0;  // |full - half-resolution| refinement gap
    double mass1 = 0.0;
    double mass2 = 0.0;
};

// Numerical total variation (1/2) integral |p - q| on the grid, composite
// Simpson per axis. A density putting less than 1 - 1e-6 of its mass on the
// grid means the grid does not resolve the laws; that is a GridTooSmall
// error, not a value.
template <typename F1, typename F2>
TvResult tv_numeric(F1&& density1, F2&& density2, const GridSpec& grid) {
    const int dim = grid.dim();
    if (dim != 1 && dim != 2) throw Unsupported("tv_numeric: dim must be 1 or 2");
    const int n = grid.points_per_axis;
    if (n < 3 || n % 2 == 0) throw InvalidData("tv_numeric: points_per_axis must be odd and >= 3");

    std::vector<std::vector<double>> axis(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
        const double h = (grid.hi[static_cast<std::size_t>(a)] - grid.lo[static_cast<std::size_t>(a)]) / (n - 1);
        auto& xs = axis[static_cast<std::size_t>(a)];
        xs.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = grid.lo[static_cast<std::size_t>(a)] + h * i;
        weights[static_cast<std::size_t>(a)] = detail::simpson_weights(n, h);
    }

    // One evaluation pass; the refinement estimate reuses the even-index
    // subgrid (stride 2), which is itself a valid Simpson grid.
    double full_tv = 0.0, coarse_tv = 0.0, full_m1 = 0.0, full_m2 = 0.0;
    if (dim == 1) {
        const auto coarse_w = detail::simpson_weights((n + 1) / 2, 2.0 * (axis[0][1] - axis[0][0]));
        std::vector<double> x(1);
        for (int i = 0; i < n; ++i) {
            x[0] = axis[0][static_cast<std::size_t>(i)];
            const double p = density1(x), q = density2(x);
            const double w = weights[0][static_cast<std::size_t>(i)];
            full_tv += w * std::abs(p - q);
            full_m1 += w * p;
            full_m2 += w * q;
            if (i % 2 == 0) coarse_tv += coarse_w[static_cast<std::size_t>(i / 2)] * std::abs(p - q);
        }
    } else {
        const int nc = (n + 1) / 2;
        const auto cw0 = detail::simpson_weights(nc, 2.0 * (axis[0][1] - axis[0][0]));
        const auto cw1 = detail::simpson_weights(nc, 2.0 * (axis[1][1] - axis[1][0]));
        std::vector<double> x(2);
        for (int i = 0; i < n; ++i) {
            x[0] = axis[0][static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) {
                x[1] = axis[1][static_cast<std::size_t>(j)];
                const double p = density1(x), q = density2(x);
                const double w = weights[0][static_cast<std::size_t>(i)] * weights[1][static_cast<std::size_t>(j)];
                full_tv += w * std::abs(p - q);
                full_m1 += w * p;
                full_m2 += w * q;
                if (i % 2 == 0 && j % 2 == 0)
                    coarse_tv += cw0[static_cast<std::size_t>(i / 2)] * cw1[static_cast<std::size_t>(j / 2)] * std::abs(p - q);
            }
        }
    }

    if (full_m1 < 1.0 - 1e-6 || full_m2 < 1.0 - 1e-6)
        throw GridTooSmall("tv_numeric: grid captures less than 1 - 1e-6 of a density's mass");

    TvResult r;
    r.value = 0.5 * full_tv;
    r.error_estimate = 0.5 * std::abs(full_tv - coarse_tv);
    r.mass1 = full_m1;
    r.mass2 = full_m2;
    return r;
}

}  // namespace wlc
