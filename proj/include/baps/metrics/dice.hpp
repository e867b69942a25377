#pragma once

#include "baps/metrics/masks.hpp"

namespace baps::metrics {

/// 2|P n T| / (|P| + |T|) on binary masks; 1 when both are empty.
inline double dice_score(const BinaryMask& p, const BinaryMask& t) {
    require_same_shape(p, t, "dice_score");
    std::size_t inter = 0, np = 0, nt = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool a = p.values[i] != 0;
        const bool b = t.values[i] != 0;
        inter += a && b;
        np += a;
        nt += b;
    }
    if (np + nt == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

/// Binarizes the prediction (value >= bin_threshold is foreground) first.
inline double dice_score(const SoftMask& pred, const BinaryMask& target, double bin_threshold = 0.5) {
    require_same_shape(pred, target, "dice_score");
    return dice_score(binarize(pred, bin_threshold), target);
}

}  // namespace baps::metrics
