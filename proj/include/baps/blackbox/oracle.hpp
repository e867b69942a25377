#pragma once

#include <cstdint>

#include "baps/adapter/image.hpp"
#include "baps/metrics/masks.hpp"

namespace baps::blackbox {

/// The only view callers get of the prompted segmenter: (image, point) in,
/// soft mask out. There is no access to weights, gradients or settings.
/// Implementations are deterministic and safe to call concurrently.
class BlackboxOracle {
public:
    virtual ~BlackboxOracle() = default;

    virtual SoftMask segment(const Image& img, const PointPrompt& p) = 0;
    virtual std::uint64_t call_count() const = 0;
};

}  // namespace baps::blackbox
