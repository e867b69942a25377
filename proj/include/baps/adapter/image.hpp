#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "baps/core/error.hpp"

namespace baps {

/// H x W x C image stored channels-last, values in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> values;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c), values(static_cast<std::size_t>(h) * w * c, fill) {
        if (h <= 0 || w <= 0) throw ConfigError("image dimensions must be positive");
        if (c != 1 && c != 3) throw ConfigError("image must have 1 or 3 channels");
    }

    std::size_t size() const noexcept { return values.size(); }
    std::size_t pixel_index(int y, int x) const noexcept {
        return (static_cast<std::size_t>(y) * width + x) * channels;
    }
    float& at(int y, int x, int ch) { return values[pixel_index(y, x) + ch]; }
    float at(int y, int x, int ch) const { return values[pixel_index(y, x) + ch]; }

    bool same_shape(const Image& o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Learned residual added to an image; same layout as Image.
struct VisualPrompt {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> values;

    static VisualPrompt zeros(int h, int w, int c) {
        return {h, w, c, std::vector<float>(static_cast<std::size_t>(h) * w * c, 0.0f)};
    }
};

struct PointPrompt {
    int x = 0;
    int y = 0;

    friend bool operator==(const PointPrompt&, const PointPrompt&) = default;
};

inline void require_inside(const PointPrompt& p, int height, int width) {
    if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height)
        throw ConfigError("point prompt (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") lies outside the " + std::to_string(height) + "x" + std::to_string(width) +
                          " image");
}

namespace adapter {

/// Element-wise img + vp, clamped to [0, 1].
inline Image apply_prompt(const Image& img, const VisualPrompt& vp) {
    if (img.height != vp.height || img.width != vp.width || img.channels != vp.channels ||
        vp.values.size() != img.values.size())
        throw ConfigError("apply_prompt: visual prompt shape does not match the image");
    Image out = img;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = std::clamp(img.values[i] + vp.values[i], 0.0f, 1.0f);
    return out;
}

}  // namespace adapter
}  // namespace baps
