#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "baps/adapter/image.hpp"
#include "baps/adapter/ip_decoder.hpp"
#include "baps/blackbox/oracle.hpp"
#include "baps/core/parallel.hpp"
#include "baps/harness/model.hpp"
#include "baps/metrics/loss.hpp"

namespace baps::harness {

/// Turns a parameter vector into per-sample visual prompts. The decoder is
/// converted to single precision once and shared across the batch.
class PromptGenerator {
public:
    PromptGenerator(const PromptModel& model, std::span<const double> params) : model_(model) {
        if (model.mode() != Mode::zeroshot && params.size() != model.param_count())
            throw ConfigError("parameter vector has " + std::to_string(params.size()) + " entries, model expects " +
                              std::to_string(model.param_count()));
        const auto& s = model.shape();
        if (model.mode() == Mode::vpt) shared_ = adapter::vpt_prompt(params, s.height, s.width, s.channels, s.gamma);
        if (model.mode() == Mode::baps)
            decoder_.emplace(adapter::IpDecoderWeights(model.arch(), zoo::ParamVector(params.begin(), params.end())));
    }

    VisualPrompt operator()(const PromptedSample& s) const {
        switch (model_.mode()) {
            case Mode::zeroshot: return VisualPrompt::zeros(s.image.height, s.image.width, s.image.channels);
            case Mode::vpt: return *shared_;
            case Mode::baps: return decoder_->decode(s.image_embedding, s.prompt_embedding);
        }
        return {};
    }

private:
    const PromptModel& model_;
    std::optional<VisualPrompt> shared_;
    std::optional<adapter::PreparedDecoder> decoder_;
};

/// Prompted image -> blackbox with the original point -> soft mask.
inline SoftMask predict(const PromptGenerator& gen, const PromptedSample& s, blackbox::BlackboxOracle& oracle) {
    return oracle.segment(adapter::apply_prompt(s.image, gen(s)), s.point);
}

/// Mean BCE + Dice loss over the batch. Samples may be evaluated in
/// parallel; the sum is taken in batch order.
inline double batch_loss(const PromptModel& model, std::span<const double> params,
                         std::span<const PromptedSample> batch, blackbox::BlackboxOracle& oracle,
                         std::size_t workers = default_worker_count()) {
    if (batch.empty()) throw ConfigError("batch_loss: empty batch");
    const PromptGenerator gen(model, params);
    const auto losses = parallel_map<double>(
        batch.size(), [&](std::size_t i) { return metrics::total_loss(predict(gen, batch[i], oracle), batch[i].gt); },
        workers);
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(batch.size());
}

}  // namespace baps::harness
