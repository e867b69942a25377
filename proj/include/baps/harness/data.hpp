#pragma once

#include <filesystem>
#include <vector>

#include "baps/core/random.hpp"
#include "baps/dataset/augment.hpp"
#include "baps/dataset/generator.hpp"
#include "baps/dataset/io.hpp"
#include "baps/harness/config.hpp"
#include "baps/harness/model.hpp"

namespace baps::harness {

/// Reads the dataset from cfg.data_dir, or generates it from cfg.data.
inline dataset::Dataset load_data(const RunConfig& cfg) {
    if (!cfg.data_dir.empty()) {
        if (!std::filesystem::is_directory(cfg.data_dir))
            throw DataError("data directory " + cfg.data_dir + " does not exist");
        return dataset::load_dataset(cfg.data_dir);
    }
    return dataset::generate(cfg.data);
}

/// Model shape with the image dimensions taken from the data.
inline ModelShape shape_for(const RunConfig& cfg, const dataset::SampleSet& samples) {
    if (samples.empty()) throw DataError("empty split");
    ModelShape s = cfg.shape;
    s.height = samples.front().image.height;
    s.width = samples.front().image.width;
    s.channels = samples.front().image.channels;
    return s;
}

/// Fixed prompts: sample `id` gets a point drawn from prompts.split(id).
inline std::vector<PromptedSample> prepare_fixed(const PromptModel& model, const dataset::SampleSet& samples,
                                                 const RngStream& prompts) {
    std::vector<PromptedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        RngStream rng = prompts.split(s.sample_id);
        const auto point = dataset::sample_point_prompt(s.gt, rng);
        out.push_back(model.prepare(s.image, s.gt, point));
    }
    return out;
}

/// Training view of one sample: augmented (unless disabled) and given a
/// random point. Falls back to the raw sample if rotation empties the mask.
inline PromptedSample prepare_training(const PromptModel& model, const dataset::SegmentationSample& s,
                                       RngStream rng, bool augment) {
    if (augment) {
        auto [img, gt] = dataset::augment(s.image, s.gt, rng);
        if (count_foreground(gt) > 0) {
            const auto point = dataset::sample_point_prompt(gt, rng);
            return model.prepare(std::move(img), std::move(gt), point);
        }
    }
    const auto point = dataset::sample_point_prompt(s.gt, rng);
    return model.prepare(s.image, s.gt, point);
}

/// Fisher-Yates permutation of [0, n).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    return idx;
}

}  // namespace baps::harness
