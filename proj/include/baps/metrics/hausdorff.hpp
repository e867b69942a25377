#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "baps/metrics/masks.hpp"

namespace baps::metrics {

namespace detail {

// Exact 1D squared distance transform (lower envelope of parabolas).
inline void squared_distance_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == inf) continue;
        if (f[v[k]] == inf) {
            v[k] = q;
            continue;
        }
        double s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double diff = q - v[k];
        d[q] = f[v[k]] == inf ? inf : diff * diff + f[v[k]];
    }
}

}  // namespace detail

/// Squared Euclidean distance from every pixel to the nearest foreground
/// pixel of `mask` (infinity if the mask is empty).
inline std::vector<double> squared_distance_to(const BinaryMask& mask) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const int h = mask.height, w = mask.width;
    std::vector<double> grid(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) grid[i] = mask.values[i] ? 0.0 : inf;

    const int n = std::max(h, w);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        detail::squared_distance_1d(f.data(), d.data(), h, v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = grid.data() + static_cast<std::size_t>(y) * w;
        std::copy(row, row + w, f.begin());
        detail::squared_distance_1d(f.data(), d.data(), w, v, z);
        std::copy(d.begin(), d.begin() + w, row);
    }
    return grid;
}

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

/// Distances from each foreground pixel of `from` to the nearest foreground
/// pixel of `to`.
inline std::vector<double> directed_distances(const BinaryMask& from, const BinaryMask& to) {
    const auto dt = squared_distance_to(to);
    std::vector<double> out;
    for (std::size_t i = 0; i < from.size(); ++i)
        if (from.values[i]) out.push_back(std::sqrt(dt[i]));
    return out;
}

/// max of the two directed 95th percentiles. Both empty gives 0; exactly one
/// empty gives the image diagonal.
inline double hd95(const BinaryMask& p, const BinaryMask& t) {
    require_same_shape(p, t, "hd95");
    const bool p_empty = count_foreground(p) == 0;
    const bool t_empty = count_foreground(t) == 0;
    if (p_empty && t_empty) return 0.0;
    if (p_empty || t_empty) return std::hypot(static_cast<double>(p.height), static_cast<double>(p.width));
    return std::max(percentile(directed_distances(p, t), 95.0), percentile(directed_distances(t, p), 95.0));
}

inline double hd95(const SoftMask& pred, const BinaryMask& target, double bin_threshold = 0.5) {
    require_same_shape(pred, target, "hd95");
    return hd95(binarize(pred, bin_threshold), target);
}

}  // namespace baps::metrics
