#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "baps/core/error.hpp"

namespace baps {

/// Row-major H x W grid.
template <typename T>
struct Grid {
    int height = 0;
    int width = 0;
    std::vector<T> values;

    Grid() = default;
    Grid(int h, int w, T fill = T{}) : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {
        if (h <= 0 || w <= 0) throw ConfigError("grid dimensions must be positive");
    }

    std::size_t size() const noexcept { return values.size(); }
    T& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Blackbox prediction, values in [0, 1].
using SoftMask = Grid<float>;
/// Ground-truth label, values in {0, 1}.
using BinaryMask = Grid<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* op) {
    if (a.height != b.height || a.width != b.width)
        throw ConfigError(std::string(op) + ": shape mismatch (" + std::to_string(a.height) + "x" +
                          std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                          std::to_string(b.width) + ")");
}

inline BinaryMask binarize(const SoftMask& pred, double threshold = 0.5) {
    BinaryMask out(pred.height, pred.width);
    for (std::size_t i = 0; i < pred.size(); ++i) out.values[i] = pred.values[i] >= threshold ? 1 : 0;
    return out;
}

inline SoftMask to_soft(const BinaryMask& m) {
    SoftMask out(m.height, m.width);
    for (std::size_t i = 0; i < m.size(); ++i) out.values[i] = m.values[i] ? 1.0f : 0.0f;
    return out;
}

inline std::size_t count_foreground(const BinaryMask& m) {
    std::size_t n = 0;
    for (auto v : m.values) n += v != 0;
    return n;
}

}  // namespace baps
