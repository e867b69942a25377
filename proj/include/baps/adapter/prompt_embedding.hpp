#pragma once

#include <cmath>
#include <vector>

#include "baps/adapter/image.hpp"

namespace baps::adapter {

using PromptEmbedding = std::vector<float>;

/// Sinusoidal embedding of a point's relative position. With n = E/4 and
/// w_k = 10000^(-4k/E), the layout is
/// [sin(w_k x) | cos(w_k x) | sin(w_k y) | cos(w_k y)], x = px/W, y = py/H.
inline PromptEmbedding embed_prompt(const PointPrompt& p, int height, int width, int dim) {
    if (dim <= 0 || dim % 2 != 0) throw ConfigError("embed_prompt: embedding size must be even and positive");
    if (dim % 4 != 0) throw ConfigError("embed_prompt: embedding size must be a multiple of 4");
    require_inside(p, height, width);
    const int n = dim / 4;
    const double xn = static_cast<double>(p.x) / width;
    const double yn = static_cast<double>(p.y) / height;
    PromptEmbedding out(static_cast<std::size_t>(dim));
    for (int k = 0; k < n; ++k) {
        const double omega = std::pow(10000.0, -4.0 * k / dim);
        out[k] = static_cast<float>(std::sin(omega * xn));
        out[n + k] = static_cast<float>(std::cos(omega * xn));
        out[2 * n + k] = static_cast<float>(std::sin(omega * yn));
        out[3 * n + k] = static_cast<float>(std::cos(omega * yn));
    }
    return out;
}

}  // namespace baps::adapter
