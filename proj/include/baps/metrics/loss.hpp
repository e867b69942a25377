#pragma once

#include <algorithm>
#include <cmath>

#include "baps/metrics/masks.hpp"

namespace baps::metrics {

inline constexpr double kBceEpsilon = 1e-7;
inline constexpr double kDiceSmoothing = 1.0;

/// Pixel-mean binary cross entropy with predictions clamped to [eps, 1 - eps].
inline double bce_loss(const SoftMask& pred, const BinaryMask& target) {
    require_same_shape(pred, target, "bce_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(static_cast<double>(pred.values[i]), kBceEpsilon, 1.0 - kBceEpsilon);
        sum -= target.values[i] ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(pred.size());
}

/// Soft Dice coefficient (2 sum(p t) + s) / (sum p + sum t + s).
inline double soft_dice_coefficient(const SoftMask& pred, const BinaryMask& target) {
    require_same_shape(pred, target, "soft_dice_coefficient");
    double inter = 0.0, sp = 0.0, st = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred.values[i];
        const double t = target.values[i] ? 1.0 : 0.0;
        inter += p * t;
        sp += p;
        st += t;
    }
    return (2.0 * inter + kDiceSmoothing) / (sp + st + kDiceSmoothing);
}

inline double dice_loss(const SoftMask& pred, const BinaryMask& target) {
    return 1.0 - soft_dice_coefficient(pred, target);
}

/// BCE + Dice, the scalar the optimizer sees (per sample).
inline double total_loss(const SoftMask& pred, const BinaryMask& target) {
    return bce_loss(pred, target) + dice_loss(pred, target);
}

}  // namespace baps::metrics
