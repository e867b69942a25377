#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "baps/adapter/encoder.hpp"
#include "baps/adapter/image.hpp"
#include "baps/adapter/ip_decoder.hpp"
#include "baps/adapter/prompt_embedding.hpp"
#include "baps/core/error.hpp"
#include "baps/metrics/masks.hpp"

namespace baps::harness {

enum class Mode { zeroshot, vpt, baps };

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::zeroshot: return "zeroshot";
        case Mode::vpt: return "vpt";
        case Mode::baps: return "baps";
    }
    return "?";
}

inline Mode parse_mode(const std::string& s) {
    if (s == "zeroshot") return Mode::zeroshot;
    if (s == "vpt") return Mode::vpt;
    if (s == "baps") return Mode::baps;
    throw ConfigError("unknown mode '" + s + "' (expected zeroshot, vpt or baps)");
}

/// One (image, prompt, label) triple ready for the blackbox, with the
/// frozen encoder output and prompt embedding precomputed.
struct PromptedSample {
    Image image;
    BinaryMask gt;
    PointPrompt point;
    adapter::ImageEmbedding image_embedding;
    adapter::PromptEmbedding prompt_embedding;
};

struct ModelShape {
    int height = 64;
    int width = 64;
    int channels = 3;
    int image_features = 16;
    int prompt_dim = 32;
    int hidden1 = 32;
    int hidden2 = 16;
    float gamma = 0.2f;
};

/// Everything needed to turn trainable parameters into visual prompts:
/// the mode, the frozen encoder, and the decoder architecture.
class PromptModel {
public:
    PromptModel(Mode mode, const ModelShape& shape, std::uint64_t encoder_seed)
        : mode_(mode),
          shape_(shape),
          encoder_(shape.height, shape.width, shape.channels, shape.image_features, encoder_seed) {
        arch_.grid_h = encoder_.grid_h();
        arch_.grid_w = encoder_.grid_w();
        arch_.image_features = shape.image_features;
        arch_.prompt_dim = shape.prompt_dim;
        arch_.hidden1 = shape.hidden1;
        arch_.hidden2 = shape.hidden2;
        arch_.out_channels = shape.channels;
        arch_.gamma = shape.gamma;
        arch_.validate();
    }

    Mode mode() const noexcept { return mode_; }
    const ModelShape& shape() const noexcept { return shape_; }
    const adapter::DecoderArch& arch() const noexcept { return arch_; }

    std::size_t param_count() const {
        switch (mode_) {
            case Mode::zeroshot: return 0;
            case Mode::vpt: return static_cast<std::size_t>(shape_.height) * shape_.width * shape_.channels;
            case Mode::baps: return adapter::decoder_param_count(arch_);
        }
        return 0;
    }

    PromptedSample prepare(Image image, BinaryMask gt, PointPrompt point) const {
        if (image.height != shape_.height || image.width != shape_.width || image.channels != shape_.channels)
            throw DataError("sample shape does not match the model configuration");
        PromptedSample s{std::move(image), std::move(gt), point, {}, {}};
        if (mode_ == Mode::baps) {
            s.image_embedding = encoder_.encode(s.image);
            s.prompt_embedding = adapter::embed_prompt(point, shape_.height, shape_.width, shape_.prompt_dim);
        }
        return s;
    }

    /// Initial parameters: decoder init for baps, small uniform for vpt.
    zoo::ParamVector initial_params(std::uint64_t seed, double init_scale) const {
        switch (mode_) {
            case Mode::zeroshot: return {};
            case Mode::vpt: {
                RngStream rng(seed);
                zoo::ParamVector p(param_count());
                for (auto& v : p) v = rng.uniform(-init_scale, init_scale);
                return p;
            }
            case Mode::baps: return adapter::IpDecoderWeights::initialize(arch_, seed, init_scale).params();
        }
        return {};
    }

private:
    Mode mode_;
    ModelShape shape_;
    adapter::FrozenEncoder encoder_;
    adapter::DecoderArch arch_;
};

}  // namespace baps::harness
