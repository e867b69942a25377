#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "baps/adapter/image.hpp"
#include "baps/core/random.hpp"

namespace baps::adapter {

/// G_h x G_w x F feature grid, channels-last.
struct ImageEmbedding {
    int grid_h = 0;
    int grid_w = 0;
    int features = 0;
    std::vector<float> values;

    friend bool operator==(const ImageEmbedding&, const ImageEmbedding&) = default;
};

/// Frozen stand-in for a pretrained featurizer: one stride-`patch` patch
/// projection to `features` channels followed by tanh. Weights are drawn
/// once from the seed and never change.
class FrozenEncoder {
public:
    static constexpr int kPatch = 8;

    FrozenEncoder(int height, int width, int channels, int features, std::uint64_t seed)
        : height_(height), width_(width), channels_(channels), features_(features) {
        if (height % kPatch != 0 || width % kPatch != 0)
            throw ConfigError("encoder: image size must be a multiple of 8");
        if (features < 1) throw ConfigError("encoder: feature count must be positive");
        const int fan_in = kPatch * kPatch * channels;
        const double bound = std::sqrt(3.0 / fan_in) * 2.0;
        RngStream rng(seed);
        weights_.resize(static_cast<std::size_t>(fan_in) * features);
        for (auto& w : weights_) w = static_cast<float>(rng.uniform(-bound, bound));
        bias_.resize(static_cast<std::size_t>(features));
        for (auto& b : bias_) b = static_cast<float>(rng.uniform(-0.1, 0.1));
    }

    int grid_h() const noexcept { return height_ / kPatch; }
    int grid_w() const noexcept { return width_ / kPatch; }
    int features() const noexcept { return features_; }

    ImageEmbedding encode(const Image& img) const {
        if (img.height != height_ || img.width != width_ || img.channels != channels_)
            throw ConfigError("frozen_encode: image shape does not match the encoder");
        ImageEmbedding emb{grid_h(), grid_w(), features_,
                           std::vector<float>(static_cast<std::size_t>(grid_h()) * grid_w() * features_)};
        std::vector<float> acc(static_cast<std::size_t>(features_));
        for (int gy = 0; gy < grid_h(); ++gy) {
            for (int gx = 0; gx < grid_w(); ++gx) {
                acc.assign(bias_.begin(), bias_.end());
                std::size_t k = 0;
                for (int py = 0; py < kPatch; ++py) {
                    for (int px = 0; px < kPatch; ++px) {
                        for (int ch = 0; ch < channels_; ++ch, ++k) {
                            // Centered input so the projection sees signed contrast.
                            const float v = img.at(gy * kPatch + py, gx * kPatch + px, ch) - 0.5f;
                            const float* w = weights_.data() + k * features_;
                            for (int f = 0; f < features_; ++f) acc[f] += v * w[f];
                        }
                    }
                }
                float* out = emb.values.data() + (static_cast<std::size_t>(gy) * grid_w() + gx) * features_;
                for (int f = 0; f < features_; ++f) out[f] = std::tanh(acc[f]);
            }
        }
        return emb;
    }

private:
    int height_, width_, channels_, features_;
    std::vector<float> weights_;  // [patch pixel][channel][feature]
    std::vector<float> bias_;
};

inline ImageEmbedding frozen_encode(const Image& img, int features, std::uint64_t encoder_seed) {
    return FrozenEncoder(img.height, img.width, img.channels, features, encoder_seed).encode(img);
}

}  // namespace baps::adapter
