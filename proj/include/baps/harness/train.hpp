#pragma once

// Training output directory:
//   config.txt        the full run configuration
//   trace.csv         one row per optimizer iteration
//   validation.csv    epoch,val_dice (epoch 0 = initial weights)
//   checkpoint.bin    best-validation weights
//   train_summary.txt counts, best epoch, wall clock, error if any

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "baps/adapter/checkpoint.hpp"
#include "baps/blackbox/oracle.hpp"
#include "baps/core/random.hpp"
#include "baps/harness/batch_loss.hpp"
#include "baps/harness/config.hpp"
#include "baps/harness/data.hpp"
#include "baps/harness/evaluate.hpp"
#include "baps/zoo/spsa.hpp"
#include "baps/zoo/trace_csv.hpp"

namespace baps::harness {

/// Forwards to another oracle and counts the calls made through it.
class CountingOracle final : public blackbox::BlackboxOracle {
public:
    explicit CountingOracle(blackbox::BlackboxOracle& inner) : inner_(inner) {}

    SoftMask segment(const Image& img, const PointPrompt& p) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.segment(img, p);
    }
    std::uint64_t call_count() const override { return calls_.load(std::memory_order_relaxed); }

private:
    blackbox::BlackboxOracle& inner_;
    std::atomic<std::uint64_t> calls_{0};
};

// Sub-stream keys under RngStream(cfg.seed).
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kShuffleStream = 2;
inline constexpr std::uint64_t kAugmentStream = 3;
inline constexpr std::uint64_t kValidationStream = 4;
inline constexpr std::uint64_t kOptimizerStream = 5;

struct EpochRecord {
    int epoch = 0;
    double val_dice = 0.0;
};

struct TrainResult {
    zoo::ParamVector best_params;  // already at checkpoint precision
    int best_epoch = 0;
    double best_val_dice = 0.0;
    std::vector<zoo::TraceRow> trace;
    std::vector<EpochRecord> epochs;
    std::uint64_t batches_per_epoch = 0;
    std::uint64_t training_oracle_calls = 0;
    std::uint64_t validation_oracle_calls = 0;
    std::optional<ErrorCategory> error_category;
    std::string error;
    double wall_clock_s = 0.0;

    bool ok() const noexcept { return !error_category.has_value(); }
};

/// Each optimizer iteration sees the next batch of the current epoch's
/// shuffled, augmented training split; the last partial batch is dropped.
/// Validation runs after every epoch on val_prompts fixed point prompts per
/// sample, and the best weights (strictly higher Dice, initial weights
/// included) are kept.
inline TrainResult train(const RunConfig& cfg, const dataset::Dataset& data, blackbox::BlackboxOracle& oracle,
                         std::size_t workers = default_worker_count()) {
    cfg.validate();
    if (cfg.mode == Mode::zeroshot) throw ConfigError("mode=zeroshot has nothing to train");
    const auto start = std::chrono::steady_clock::now();

    const PromptModel model(cfg.mode, shape_for(cfg, data.train), cfg.encoder_seed);
    const RngStream root(cfg.seed);
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    TrainResult result;
    result.batches_per_epoch = data.train.size() / bs;
    if (result.batches_per_epoch == 0)
        throw ConfigError("batch_size " + std::to_string(bs) + " exceeds the training split size " +
                          std::to_string(data.train.size()));

    std::vector<PromptedSample> validation;
    for (int r = 0; r < cfg.val_prompts; ++r) {
        auto part = prepare_fixed(model, data.val, root.split(kValidationStream).split(static_cast<std::uint64_t>(r)));
        std::move(part.begin(), part.end(), std::back_inserter(validation));
    }
    CountingOracle train_oracle(oracle);
    CountingOracle val_oracle(oracle);
    const auto validate_params = [&](const zoo::ParamVector& p) {
        return mean_dice(score_samples(PromptGenerator(model, p), validation, val_oracle, workers));
    };

    auto phi0 = model.initial_params(root.split(kInitStream).seed(), cfg.init_scale);
    result.best_params = adapter::round_to_checkpoint_precision(phi0);
    result.best_val_dice = validate_params(result.best_params);
    result.epochs.push_back({0, result.best_val_dice});

    const auto build_epoch = [&](int epoch) {
        const auto e = static_cast<std::uint64_t>(epoch);
        const auto order = shuffled_indices(data.train.size(), root.split(kShuffleStream).split(e));
        const RngStream aug = root.split(kAugmentStream).split(e);
        std::vector<std::vector<PromptedSample>> batches(result.batches_per_epoch);
        for (std::size_t b = 0; b < batches.size(); ++b)
            for (std::size_t k = 0; k < bs; ++k) {
                const auto& s = data.train[order[b * bs + k]];
                batches[b].push_back(prepare_training(model, s, aug.split(s.sample_id), cfg.augment));
            }
        return batches;
    };

    const std::uint64_t budget = static_cast<std::uint64_t>(cfg.epochs) * result.batches_per_epoch;
    if (budget > 0) {
        int epoch = 1;
        std::size_t batch_index = 0;
        auto batches = build_epoch(epoch);

        const auto loss = [&](std::span<const double> phi) {
            return batch_loss(model, phi, batches[batch_index], train_oracle, workers);
        };
        const zoo::IterationObserver observer = [&](const zoo::TraceRow&, std::span<const double> phi) {
            if (++batch_index < batches.size()) return true;
            auto rounded = adapter::round_to_checkpoint_precision(zoo::ParamVector(phi.begin(), phi.end()));
            const double dice = validate_params(rounded);
            result.epochs.push_back({epoch, dice});
            if (dice > result.best_val_dice) {
                result.best_val_dice = dice;
                result.best_epoch = epoch;
                result.best_params = std::move(rounded);
            }
            if (epoch == cfg.epochs) return false;
            batches = build_epoch(++epoch);
            batch_index = 0;
            return true;
        };

        auto run = zoo::run_optimizer(cfg.optimizer, loss, std::move(phi0), cfg.zoo, budget,
                                      root.split(kOptimizerStream), observer);
        result.trace = std::move(run.trace);
        result.error_category = run.error_category;
        result.error = std::move(run.error);
    }

    result.training_oracle_calls = train_oracle.call_count();
    result.validation_oracle_calls = val_oracle.call_count();
    result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

inline void write_training_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const TrainResult& r) {
    std::filesystem::create_directories(dir);
    save_config((dir / "config.txt").string(), cfg);
    zoo::write_trace_csv((dir / "trace.csv").string(), r.trace);
    adapter::save_checkpoint((dir / "checkpoint.bin").string(), r.best_params);
    {
        std::ofstream val(dir / "validation.csv", std::ios::binary);
        if (!val) throw DataError("cannot write " + (dir / "validation.csv").string());
        val << "epoch,val_dice\n";
        for (const auto& e : r.epochs) val << e.epoch << ',' << format_double(e.val_dice) << '\n';
    }
    std::ofstream txt(dir / "train_summary.txt", std::ios::binary);
    if (!txt) throw DataError("cannot write " + (dir / "train_summary.txt").string());
    txt << "label = " << run_label(cfg) << '\n'
        << "config_fingerprint = " << config_fingerprint(cfg) << '\n'
        << "parameters = " << r.best_params.size() << '\n'
        << "iterations = " << r.trace.size() << '\n'
        << "batches_per_epoch = " << r.batches_per_epoch << '\n'
        << "best_epoch = " << r.best_epoch << '\n'
        << "best_val_dice = " << format_double(r.best_val_dice) << '\n'
        << "training_oracle_calls = " << r.training_oracle_calls << '\n'
        << "validation_oracle_calls = " << r.validation_oracle_calls << '\n'
        << "status = " << (r.ok() ? "ok" : "error") << '\n';
    if (!r.ok()) txt << "error = " << r.error << '\n';
    txt << "wall_clock_s = " << format_double(r.wall_clock_s) << '\n';
}

}  // namespace baps::harness
