#pragma once

// Image-prompt decoder: the broadcast prompt embedding is concatenated with
// the image embedding on every grid cell, then three stride-2 transposed
// convolutions (kernel 4, padding 1) upsample G -> 2G -> 4G -> 8G. Hidden
// stages use ReLU; the output stage is tanh scaled by gamma.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "baps/adapter/encoder.hpp"
#include "baps/adapter/image.hpp"
#include "baps/adapter/prompt_embedding.hpp"
#include "baps/core/random.hpp"
#include "baps/zoo/types.hpp"

namespace baps::adapter {

using zoo::ParamVector;

inline constexpr int kDeconvKernel = 4;
inline constexpr std::size_t kMaxDecoderParams = 120000;

struct DecoderArch {
    int grid_h = 8;
    int grid_w = 8;
    int image_features = 16;
    int prompt_dim = 32;
    int hidden1 = 32;
    int hidden2 = 16;
    int out_channels = 3;
    float gamma = 0.2f;

    std::array<int, 4> channels() const { return {image_features + prompt_dim, hidden1, hidden2, out_channels}; }
    int out_height() const noexcept { return grid_h * 8; }
    int out_width() const noexcept { return grid_w * 8; }

    void validate() const {
        if (grid_h < 1 || grid_w < 1 || image_features < 1 || prompt_dim < 1 || hidden1 < 1 || hidden2 < 1)
            throw ConfigError("decoder: every dimension must be positive");
        if (out_channels != 1 && out_channels != 3) throw ConfigError("decoder: output must have 1 or 3 channels");
        if (!(gamma > 0.0f)) throw ConfigError("decoder: gamma must be positive");
    }
};

/// Offsets of each stage's weights ([ky][kx][cin][cout]) and bias in the
/// flat parameter vector.
struct StageLayout {
    int cin = 0;
    int cout = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;

    std::size_t weight_count() const noexcept {
        return static_cast<std::size_t>(kDeconvKernel) * kDeconvKernel * cin * cout;
    }
};

inline std::array<StageLayout, 3> decoder_layout(const DecoderArch& arch) {
    const auto ch = arch.channels();
    std::array<StageLayout, 3> stages{};
    std::size_t offset = 0;
    for (int s = 0; s < 3; ++s) {
        stages[s].cin = ch[s];
        stages[s].cout = ch[s + 1];
        stages[s].weight_offset = offset;
        offset += stages[s].weight_count();
        stages[s].bias_offset = offset;
        offset += static_cast<std::size_t>(stages[s].cout);
    }
    return stages;
}

inline std::size_t decoder_param_count(const DecoderArch& arch) {
    const auto stages = decoder_layout(arch);
    return stages[2].bias_offset + static_cast<std::size_t>(stages[2].cout);
}

/// Decoder weights: an architecture plus its flat parameter vector. The
/// vector is the optimizer's view; flatten/unflatten is the identity.
class IpDecoderWeights {
public:
    IpDecoderWeights(DecoderArch arch, ParamVector params) : arch_(arch), params_(std::move(params)) {
        arch_.validate();
        if (params_.size() != decoder_param_count(arch_))
            throw ConfigError("decoder: expected " + std::to_string(decoder_param_count(arch_)) +
                              " parameters, got " + std::to_string(params_.size()));
    }

    static IpDecoderWeights zeros(const DecoderArch& arch) {
        return {arch, ParamVector(decoder_param_count(arch), 0.0)};
    }

    /// Hidden stages: uniform(+-sqrt(6 / fan_in)). Output stage: uniform(+-init_scale),
    /// so the initial visual prompt is a small perturbation. All biases start at 0.
    static IpDecoderWeights initialize(const DecoderArch& arch, std::uint64_t seed, double init_scale = 0.01) {
        auto w = zeros(arch);
        RngStream rng(seed);
        const auto stages = decoder_layout(arch);
        for (int s = 0; s < 3; ++s) {
            const auto& st = stages[s];
            // Each output pixel of a stride-2 k=4 deconvolution sees 2x2 input taps.
            const double fan_in = 4.0 * st.cin;
            const double bound = s < 2 ? std::sqrt(6.0 / fan_in) : init_scale;
            for (std::size_t i = 0; i < st.weight_count(); ++i)
                w.params_[st.weight_offset + i] = rng.uniform(-bound, bound);
        }
        return w;
    }

    const DecoderArch& arch() const noexcept { return arch_; }
    const ParamVector& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.size(); }

private:
    DecoderArch arch_;
    ParamVector params_;
};

namespace detail {

/// Stride-2, kernel-4, padding-1 transposed convolution, channels-last.
/// Output is (2h) x (2w) x cout.
inline void deconv_s2k4(const float* in, int h, int w, int cin, const float* weights, const float* bias, int cout,
                        float* out) {
    const int oh = 2 * h, ow = 2 * w;
    for (int i = 0; i < oh * ow; ++i) std::copy(bias, bias + cout, out + static_cast<std::size_t>(i) * cout);
    for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
            const float* src = in + (static_cast<std::size_t>(iy) * w + ix) * cin;
            for (int ky = 0; ky < kDeconvKernel; ++ky) {
                const int oy = 2 * iy - 1 + ky;
                if (oy < 0 || oy >= oh) continue;
                for (int kx = 0; kx < kDeconvKernel; ++kx) {
                    const int ox = 2 * ix - 1 + kx;
                    if (ox < 0 || ox >= ow) continue;
                    float* dst = out + (static_cast<std::size_t>(oy) * ow + ox) * cout;
                    const float* wk = weights + static_cast<std::size_t>(ky * kDeconvKernel + kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const float v = src[ci];
                        if (v == 0.0f) continue;
                        const float* wr = wk + static_cast<std::size_t>(ci) * cout;
                        for (int co = 0; co < cout; ++co) dst[co] += v * wr[co];
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Single-precision copy of the weights, prepared once per parameter vector
/// and then reused for every sample evaluated at that point.
class PreparedDecoder {
public:
    explicit PreparedDecoder(const IpDecoderWeights& weights) : arch_(weights.arch()), layout_(decoder_layout(arch_)) {
        const auto& p = weights.params();
        if (!zoo::all_finite(p)) throw DivergenceError("ip_decode: decoder weights are not finite");
        params_.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) params_[i] = static_cast<float>(p[i]);
    }

    const DecoderArch& arch() const noexcept { return arch_; }

    VisualPrompt decode(const ImageEmbedding& img_emb, const PromptEmbedding& prompt_emb) const {
        if (img_emb.grid_h != arch_.grid_h || img_emb.grid_w != arch_.grid_w ||
            img_emb.features != arch_.image_features)
            throw ConfigError("ip_decode: image embedding shape does not match the decoder");
        if (static_cast<int>(prompt_emb.size()) != arch_.prompt_dim)
            throw ConfigError("ip_decode: prompt embedding size does not match the decoder");

        const int cells = arch_.grid_h * arch_.grid_w;
        const int cin = layout_[0].cin;
        std::vector<float> x(static_cast<std::size_t>(cells) * cin);
        for (int c = 0; c < cells; ++c) {
            float* dst = x.data() + static_cast<std::size_t>(c) * cin;
            std::copy_n(img_emb.values.data() + static_cast<std::size_t>(c) * arch_.image_features,
                        arch_.image_features, dst);
            std::copy(prompt_emb.begin(), prompt_emb.end(), dst + arch_.image_features);
        }

        int h = arch_.grid_h, w = arch_.grid_w;
        for (int s = 0; s < 3; ++s) {
            const auto& st = layout_[s];
            std::vector<float> y(static_cast<std::size_t>(4) * h * w * st.cout);
            detail::deconv_s2k4(x.data(), h, w, st.cin, params_.data() + st.weight_offset,
                                params_.data() + st.bias_offset, st.cout, y.data());
            h *= 2;
            w *= 2;
            if (s < 2) {
                for (auto& v : y) v = std::max(v, 0.0f);
            } else {
                for (auto& v : y) v = arch_.gamma * std::tanh(v);
            }
            x = std::move(y);
        }
        return {h, w, arch_.out_channels, std::move(x)};
    }

private:
    DecoderArch arch_;
    std::array<StageLayout, 3> layout_;
    std::vector<float> params_;
};

inline VisualPrompt ip_decode(const IpDecoderWeights& weights, const ImageEmbedding& img_emb,
                              const PromptEmbedding& prompt_emb) {
    return PreparedDecoder(weights).decode(img_emb, prompt_emb);
}

/// Input-independent baseline prompt: tanh(shared) * gamma reshaped to H x W x C.
inline VisualPrompt vpt_prompt(std::span<const double> shared, int height, int width, int channels, float gamma) {
    const std::size_t n = static_cast<std::size_t>(height) * width * channels;
    if (shared.size() != n)
        throw ConfigError("vpt_prompt: expected " + std::to_string(n) + " parameters, got " +
                          std::to_string(shared.size()));
    if (!zoo::all_finite(shared)) throw DivergenceError("vpt_prompt: prompt parameters are not finite");
    VisualPrompt vp{height, width, channels, std::vector<float>(n)};
    for (std::size_t i = 0; i < n; ++i) vp.values[i] = gamma * static_cast<float>(std::tanh(shared[i]));
    return vp;
}

}  // namespace baps::adapter
