#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "baps/adapter/image.hpp"
#include "baps/core/random.hpp"
#include "baps/metrics/masks.hpp"

namespace baps::dataset {

struct AugmentParams {
    double angle_deg = 0.0;
    double brightness = 1.0;
    double saturation = 1.0;
};

inline constexpr double kMaxRotationDeg = 10.0;
inline constexpr double kColorScale = 2.0;

/// Angle uniform in [-10, 10] degrees; brightness and saturation factors
/// log-uniform in [1/2, 2].
inline AugmentParams sample_augment_params(RngStream& rng) {
    AugmentParams p;
    p.angle_deg = rng.uniform(-kMaxRotationDeg, kMaxRotationDeg);
    p.brightness = std::pow(kColorScale, rng.uniform(-1.0, 1.0));
    p.saturation = std::pow(kColorScale, rng.uniform(-1.0, 1.0));
    return p;
}

/// Rotation about the image center: bilinear with edge replication for the
/// image, nearest neighbour (zero outside) for the mask.
inline std::pair<Image, BinaryMask> rotate(const Image& img, const BinaryMask& gt, double angle_deg) {
    if (angle_deg == 0.0) return {img, gt};
    const int h = img.height, w = img.width, ch = img.channels;
    const double rad = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
    Image out(h, w, ch);
    BinaryMask mask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Inverse map: output pixel -> source location.
            const double dx = x - cx, dy = y - cy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;

            const int nx = static_cast<int>(std::lround(sx)), ny = static_cast<int>(std::lround(sy));
            mask.at(y, x) = (nx >= 0 && nx < w && ny >= 0 && ny < h) ? gt.at(ny, nx) : 0;

            const double fx = std::clamp(sx, 0.0, w - 1.0), fy = std::clamp(sy, 0.0, h - 1.0);
            const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            const double ax = fx - x0, ay = fy - y0;
            for (int k = 0; k < ch; ++k) {
                const double top = (1 - ax) * img.at(y0, x0, k) + ax * img.at(y0, x1, k);
                const double bot = (1 - ax) * img.at(y1, x0, k) + ax * img.at(y1, x1, k);
                out.at(y, x, k) = static_cast<float>((1 - ay) * top + ay * bot);
            }
        }
    }
    return {std::move(out), std::move(mask)};
}

inline void scale_brightness(Image& img, double factor) {
    if (factor == 1.0) return;
    for (auto& v : img.values) v = static_cast<float>(std::clamp(v * factor, 0.0, 1.0));
}

/// Scales each pixel's channel spread about its channel mean; no-op for
/// single-channel images.
inline void scale_saturation(Image& img, double factor) {
    if (img.channels != 3 || factor == 1.0) return;
    for (std::size_t i = 0; i < img.values.size(); i += 3) {
        const double m = (img.values[i] + img.values[i + 1] + img.values[i + 2]) / 3.0;
        for (std::size_t k = 0; k < 3; ++k)
            img.values[i + k] = static_cast<float>(std::clamp(m + factor * (img.values[i + k] - m), 0.0, 1.0));
    }
}

inline std::pair<Image, BinaryMask> augment(const Image& img, const BinaryMask& gt, const AugmentParams& p) {
    auto [out, mask] = rotate(img, gt, p.angle_deg);
    scale_brightness(out, p.brightness);
    scale_saturation(out, p.saturation);
    return {std::move(out), std::move(mask)};
}

inline std::pair<Image, BinaryMask> augment(const Image& img, const BinaryMask& gt, RngStream& rng) {
    return augment(img, gt, sample_augment_params(rng));
}

}  // namespace baps::dataset
