#pragma once

// Evaluation report files:
//   report.csv   repeat,sample_id,dice,hd95 (one row per sample per repeat)
//   summary.txt  key = value aggregates, fingerprints, oracle calls, wall clock

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "baps/blackbox/oracle.hpp"
#include "baps/core/format.hpp"
#include "baps/core/parallel.hpp"
#include "baps/dataset/generator.hpp"
#include "baps/dataset/io.hpp"
#include "baps/harness/batch_loss.hpp"
#include "baps/harness/config.hpp"
#include "baps/harness/data.hpp"
#include "baps/metrics/dice.hpp"
#include "baps/metrics/hausdorff.hpp"

namespace baps::harness {

struct SampleScore {
    double dice = 0.0;
    double hd95 = 0.0;
};

/// Dice and HD95 of the prompted prediction for each sample, in order.
inline std::vector<SampleScore> score_samples(const PromptGenerator& gen, std::span<const PromptedSample> samples,
                                              blackbox::BlackboxOracle& oracle,
                                              std::size_t workers = default_worker_count()) {
    return parallel_map<SampleScore>(
        samples.size(),
        [&](std::size_t i) {
            const auto pred = binarize(predict(gen, samples[i], oracle), 0.5);
            return SampleScore{metrics::dice_score(pred, samples[i].gt), metrics::hd95(pred, samples[i].gt)};
        },
        workers);
}

inline double mean_dice(std::span<const SampleScore> scores) {
    if (scores.empty()) throw DataError("no samples to score");
    double sum = 0.0;
    for (const auto& s : scores) sum += s.dice;
    return sum / static_cast<double>(scores.size());
}

struct ReportRow {
    int repeat = 0;
    std::uint32_t sample_id = 0;
    double dice = 0.0;
    double hd95 = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
    std::string label;  // mode, plus optimizer for trained modes
    Mode mode = Mode::zeroshot;
    std::string dataset_fingerprint;
    std::string config_fingerprint;
    std::vector<ReportRow> rows;
    std::vector<double> repeat_dice;  // mean Dice of each repeat
    std::vector<double> repeat_hd95;
    double dice_mean = 0.0;
    double dice_std = 0.0;  // population std across repeats
    double hd95_mean = 0.0;
    double hd95_std = 0.0;
    std::uint64_t oracle_calls = 0;
    double wall_clock_s = 0.0;
};

inline std::string run_label(const RunConfig& cfg) {
    if (cfg.mode == Mode::zeroshot) return to_string(cfg.mode);
    return to_string(cfg.mode) + "/" + zoo::to_string(cfg.optimizer);
}

namespace detail {

inline std::pair<double, double> mean_std(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace detail

/// Fills the per-repeat and overall aggregates from `rows`.
inline void aggregate(EvalReport& r, int repeats) {
    std::vector<double> dsum(static_cast<std::size_t>(repeats), 0.0), hsum(dsum);
    std::vector<std::size_t> n(static_cast<std::size_t>(repeats), 0);
    for (const auto& row : r.rows) {
        if (row.repeat < 0 || row.repeat >= repeats) throw DataError("report row has repeat out of range");
        const auto k = static_cast<std::size_t>(row.repeat);
        dsum[k] += row.dice;
        hsum[k] += row.hd95;
        ++n[k];
    }
    r.repeat_dice.assign(dsum.size(), 0.0);
    r.repeat_hd95.assign(hsum.size(), 0.0);
    for (std::size_t k = 0; k < dsum.size(); ++k) {
        if (n[k] == 0 || n[k] != n[0]) throw DataError("report repeats have unequal sample counts");
        r.repeat_dice[k] = dsum[k] / static_cast<double>(n[k]);
        r.repeat_hd95[k] = hsum[k] / static_cast<double>(n[k]);
    }
    std::tie(r.dice_mean, r.dice_std) = detail::mean_std(r.repeat_dice);
    std::tie(r.hd95_mean, r.hd95_std) = detail::mean_std(r.repeat_hd95);
}

/// Scores the test split `eval_repeats` times, each with fresh point prompts
/// drawn from eval_seed (repeat r, sample id s -> split(r).split(s)).
/// `params` is ignored in zeroshot mode.
inline EvalReport evaluate(const RunConfig& cfg, const dataset::SampleSet& test, std::span<const double> params,
                           blackbox::BlackboxOracle& oracle, std::size_t workers = default_worker_count()) {
    cfg.validate();
    if (cfg.mode != Mode::zeroshot && params.empty())
        throw ConfigError("mode=" + to_string(cfg.mode) + " needs a checkpoint to evaluate");
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t calls_before = oracle.call_count();

    const PromptModel model(cfg.mode, shape_for(cfg, test), cfg.encoder_seed);
    const PromptGenerator gen(model, params);
    const RngStream eval_rng(cfg.eval_seed);

    EvalReport r;
    r.label = run_label(cfg);
    r.mode = cfg.mode;
    r.dataset_fingerprint = dataset::fingerprint(test);
    r.config_fingerprint = config_fingerprint(cfg);
    for (int rep = 0; rep < cfg.eval_repeats; ++rep) {
        const auto prepared = prepare_fixed(model, test, eval_rng.split(static_cast<std::uint64_t>(rep)));
        const auto scores = score_samples(gen, prepared, oracle, workers);
        for (std::size_t i = 0; i < test.size(); ++i)
            r.rows.push_back({rep, test[i].sample_id, scores[i].dice, scores[i].hd95});
    }
    aggregate(r, cfg.eval_repeats);
    r.oracle_calls = oracle.call_count() - calls_before;
    r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline constexpr const char* kReportHeader = "repeat,sample_id,dice,hd95";

inline void write_report(const std::filesystem::path& dir, const EvalReport& r) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "report.csv", std::ios::binary);
        if (!csv) throw DataError("cannot write " + (dir / "report.csv").string());
        csv << kReportHeader << '\n';
        for (const auto& row : r.rows)
            csv << row.repeat << ',' << row.sample_id << ',' << format_double(row.dice) << ','
                << format_double(row.hd95) << '\n';
    }
    std::ofstream txt(dir / "summary.txt", std::ios::binary);
    if (!txt) throw DataError("cannot write " + (dir / "summary.txt").string());
    txt << "label = " << r.label << '\n'
        << "mode = " << to_string(r.mode) << '\n'
        << "dataset_fingerprint = " << r.dataset_fingerprint << '\n'
        << "config_fingerprint = " << r.config_fingerprint << '\n'
        << "repeats = " << r.repeat_dice.size() << '\n'
        << "samples = " << r.rows.size() << '\n';
    for (std::size_t k = 0; k < r.repeat_dice.size(); ++k)
        txt << "repeat_" << k << " = dice " << format_double(r.repeat_dice[k]) << " hd95 "
            << format_double(r.repeat_hd95[k]) << '\n';
    txt << "dice_mean = " << format_double(r.dice_mean) << '\n'
        << "dice_std = " << format_double(r.dice_std) << '\n'
        << "hd95_mean = " << format_double(r.hd95_mean) << '\n'
        << "hd95_std = " << format_double(r.hd95_std) << '\n'
        << "oracle_calls = " << r.oracle_calls << '\n'
        << "wall_clock_s = " << format_double(r.wall_clock_s) << '\n';
}

/// Reads a report directory back. Aggregates are recomputed from
/// report.csv and must agree with summary.txt.
inline EvalReport read_report(const std::filesystem::path& dir) {
    std::ifstream txt(dir / "summary.txt");
    if (!txt) throw DataError("cannot read " + (dir / "summary.txt").string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(txt, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    const auto get = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw DataError((dir / "summary.txt").string() + ": missing " + key);
        return it->second;
    };

    EvalReport r;
    try {
        r.label = get("label");
        r.mode = parse_mode(get("mode"));
        r.dataset_fingerprint = get("dataset_fingerprint");
        r.config_fingerprint = get("config_fingerprint");
        r.oracle_calls = static_cast<std::uint64_t>(parse_int(get("oracle_calls"), "oracle_calls"));
        r.wall_clock_s = parse_double(get("wall_clock_s"), "wall_clock_s");
        const auto repeats = static_cast<int>(parse_int(get("repeats"), "repeats"));

        std::ifstream csv(dir / "report.csv");
        if (!csv) throw DataError("cannot read " + (dir / "report.csv").string());
        if (!std::getline(csv, line) || detail::trim(line) != kReportHeader)
            throw DataError((dir / "report.csv").string() + ": bad header");
        while (std::getline(csv, line)) {
            if (detail::trim(line).empty()) continue;
            std::istringstream ls(line);
            std::string f[4];
            for (auto& field : f)
                if (!std::getline(ls, field, ',')) throw DataError("report.csv: short row");
            r.rows.push_back({static_cast<int>(parse_int(f[0], "repeat")),
                              static_cast<std::uint32_t>(parse_int(f[1], "sample_id")), parse_double(f[2], "dice"),
                              parse_double(f[3], "hd95")});
        }
        if (repeats < 1) throw DataError("summary.txt: repeats must be >= 1");
        aggregate(r, repeats);
        if (format_double(r.dice_mean) != get("dice_mean") || format_double(r.hd95_mean) != get("hd95_mean"))
            throw DataError((dir / "summary.txt").string() + ": aggregates disagree with report.csv");
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
    return r;
}

}  // namespace baps::harness
