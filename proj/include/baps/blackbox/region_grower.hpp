#pragma once

// Simulated prompted segmenter: blur, then grow the region of pixels whose
// blurred intensity is within tau of the seed's, then soften by distance
// from the seed intensity.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "baps/blackbox/oracle.hpp"
#include "baps/core/error.hpp"

namespace baps::blackbox {

struct GrowerParams {
    double tau = 0.15;
    double sigma = 1.0;  // px; 0 disables the blur
    int connectivity = 4;

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("grower: tau must lie in (0, 1)");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("grower: sigma must be nonnegative");
        if (connectivity != 4 && connectivity != 8) throw ConfigError("grower: connectivity must be 4 or 8");
    }
};

/// Channel mean followed by a separable Gaussian blur with edge replication.
inline Grid<double> blurred_intensity(const Image& img, double sigma) {
    const int h = img.height, w = img.width;
    Grid<double> gray(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int c = 0; c < img.channels; ++c) s += img.at(y, x, c);
            gray.at(y, x) = s / img.channels;
        }
    if (sigma <= 0.0) return gray;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        norm += kernel[k + radius];
    }
    for (auto& k : kernel) k /= norm;

    Grid<double> tmp(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * gray.at(y, std::clamp(x + k, 0, w - 1));
            tmp.at(y, x) = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * tmp.at(std::clamp(y + k, 0, h - 1), x);
            gray.at(y, x) = s;
        }
    return gray;
}

/// Connected component (4- or 8-neighbourhood) of pixels with
/// |value - value[seed]| <= tau that contains the seed.
inline BinaryMask grow_region(const Grid<double>& value, const PointPrompt& seed, double tau, int connectivity) {
    const int h = value.height, w = value.width;
    BinaryMask mask(h, w);
    const double v = value.at(seed.y, seed.x);
    std::vector<PointPrompt> stack{seed};
    mask.at(seed.y, seed.x) = 1;
    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!stack.empty()) {
        const PointPrompt p = stack.back();
        stack.pop_back();
        for (int k = 0; k < connectivity; ++k) {
            const int nx = p.x + dx8[k], ny = p.y + dy8[k];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h || mask.at(ny, nx)) continue;
            if (std::abs(value.at(ny, nx) - v) <= tau) {
                mask.at(ny, nx) = 1;
                stack.push_back({nx, ny});
            }
        }
    }
    return mask;
}

inline SoftMask segment(const Image& img, const PointPrompt& p, const GrowerParams& params) {
    params.validate();
    require_inside(p, img.height, img.width);
    const auto value = blurred_intensity(img, params.sigma);
    const auto hard = grow_region(value, p, params.tau, params.connectivity);
    const double v = value.at(p.y, p.x);
    SoftMask out(img.height, img.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!hard.values[i]) continue;
        out.values[i] = static_cast<float>(std::max(0.0, 1.0 - std::abs(value.values[i] - v) / params.tau));
    }
    return out;
}

namespace detail {

class RegionGrowerOracle final : public BlackboxOracle {
public:
    explicit RegionGrowerOracle(GrowerParams params) : params_(params) { params_.validate(); }

    SoftMask segment(const Image& img, const PointPrompt& p) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return blackbox::segment(img, p, params_);
    }

    std::uint64_t call_count() const override { return calls_.load(std::memory_order_relaxed); }

private:
    GrowerParams params_;
    std::atomic<std::uint64_t> calls_{0};
};

}  // namespace detail

/// Opaque in-process oracle; the captured parameters are not readable
/// through the returned handle.
inline std::unique_ptr<BlackboxOracle> make_oracle(const GrowerParams& params) {
    return std::make_unique<detail::RegionGrowerOracle>(params);
}

}  // namespace baps::blackbox
