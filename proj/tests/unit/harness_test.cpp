#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "baps/blackbox/region_grower.hpp"
#include "baps/blackbox/subprocess.hpp"
#include "baps/harness/compare.hpp"
#include "baps/harness/train.hpp"

using namespace baps;
using namespace baps::harness;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(Mode mode = Mode::baps) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.data.n_train = 8;
    cfg.data.n_val = 2;
    cfg.data.n_test = 3;
    cfg.data.height = 16;
    cfg.data.width = 16;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.eval_repeats = 2;
    cfg.val_prompts = 1;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("baps_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BAPS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, TextRoundTrip) {
    RunConfig cfg;
    set_config_value(cfg, "alpha", "0.25");
    set_config_value(cfg, "optimizer", "spsa-gc");
    set_config_value(cfg, "augment", "false");
    set_config_value(cfg, "oracle", "subprocess");
    const auto back = parse_config_text(to_text(cfg));
    EXPECT_EQ(to_text(back), to_text(cfg));
    EXPECT_EQ(back.zoo.alpha, 0.25);
    EXPECT_EQ(back.optimizer, zoo::Variant::spsa_gc);
    EXPECT_FALSE(back.augment);
    EXPECT_EQ(back.oracle, OracleMode::subprocess);
    EXPECT_EQ(config_fingerprint(back), config_fingerprint(cfg));
    RunConfig other = cfg;
    other.out = "elsewhere";
    EXPECT_EQ(config_fingerprint(other), config_fingerprint(cfg));
    other.seed = 9;
    EXPECT_NE(config_fingerprint(other), config_fingerprint(cfg));
}

TEST(Config, CommentsAndBlankLines) {
    const auto cfg = parse_config_text("# header\n\n  epochs = 4  # trailing\nmode=vpt\n");
    EXPECT_EQ(cfg.epochs, 4);
    EXPECT_EQ(cfg.mode, Mode::vpt);
    EXPECT_EQ(cfg.explicit_keys.count("epochs"), 1u);
}

TEST(Config, ParseErrors) {
    EXPECT_THROW(parse_config_text("epochs 4\n"), ConfigError);
    EXPECT_THROW(parse_config_text("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("epochs = four\n"), ConfigError);
    EXPECT_THROW(parse_config_text("augment = maybe\n"), ConfigError);
    EXPECT_THROW(parse_config_text("mode = fancy\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/baps.cfg"), ConfigError);
}

TEST(Config, ZeroshotRejectsOptimizerKeys) {
    auto cfg = parse_config_text("mode = zeroshot\n");
    EXPECT_NO_THROW(cfg.validate());
    for (const char* key : {"alpha", "c", "beta", "k1", "cooldown", "eta1", "eta2", "grad_threshold", "optimizer"}) {
        auto bad = cfg;
        set_config_value(bad, key, key == std::string("optimizer") ? "spsa" : "1");
        EXPECT_THROW(bad.validate(), ConfigError) << key;
    }
    // The saved zeroshot config leaves optimizer keys out, so it reloads.
    EXPECT_EQ(to_text(cfg).find("alpha"), std::string::npos);
    EXPECT_NO_THROW(parse_config_text(to_text(cfg)).validate());
}

TEST(Config, InvalidValues) {
    for (const char* text : {"batch_size = 0", "epochs = -1", "eval_repeats = 0", "alpha = 0", "c = -1",
                             "beta = 1", "prompt_dim = 30", "tau = 0", "connectivity = 6", "n_train = 0"}) {
        EXPECT_THROW(parse_config_text(text).validate(), ConfigError) << text;
    }
}

TEST(BatchLoss, ZeroshotIgnoresParameters) {
    const auto cfg = small_config(Mode::zeroshot);
    const auto data = load_data(cfg);
    const PromptModel model(Mode::zeroshot, shape_for(cfg, data.train), 0);
    const auto batch = prepare_fixed(model, data.train, RngStream(1));
    auto oracle = blackbox::make_oracle({});
    const double a = batch_loss(model, {}, batch, *oracle, 1);
    const std::vector<double> junk{1.0, 2.0, 3.0};
    EXPECT_EQ(batch_loss(model, junk, batch, *oracle, 1), a);
    EXPECT_GT(a, 0.0);
}

TEST(BatchLoss, PerfectPredictionIsNearZero) {
    ModelShape shape;
    shape.height = shape.width = 16;
    const PromptModel model(Mode::zeroshot, shape, 0);
    std::vector<PromptedSample> batch{model.prepare(Image(16, 16, 3, 0.4f), BinaryMask(16, 16, 1), {5, 5})};
    auto oracle = blackbox::make_oracle({});
    EXPECT_LT(batch_loss(model, {}, batch, *oracle, 1), 0.01);
}

TEST(BatchLoss, IsTheMeanOfPerSampleLosses) {
    const auto cfg = small_config(Mode::baps);
    const auto data = load_data(cfg);
    const PromptModel model(Mode::baps, shape_for(cfg, data.train), 0);
    const auto params = model.initial_params(3, 0.05);
    const auto batch = prepare_fixed(model, data.train, RngStream(2));
    auto oracle = blackbox::make_oracle({});
    const std::span<const PromptedSample> all(batch);
    const double first = batch_loss(model, params, all.subspan(0, 1), *oracle, 1);
    const double second = batch_loss(model, params, all.subspan(1, 1), *oracle, 1);
    EXPECT_NEAR(batch_loss(model, params, all.subspan(0, 2), *oracle, 1), (first + second) / 2, 1e-12);
    EXPECT_EQ(batch_loss(model, params, all, *oracle, 1), batch_loss(model, params, all, *oracle, 3));
    EXPECT_THROW(batch_loss(model, params, all.subspan(0, 0), *oracle, 1), ConfigError);
    EXPECT_THROW(batch_loss(model, std::vector<double>(5), all, *oracle, 1), ConfigError);
}

TEST(Train, ZeroEpochsKeepsInitialWeights) {
    auto cfg = small_config();
    cfg.epochs = 0;
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto r = train(cfg, data, *oracle, 1);
    EXPECT_TRUE(r.ok());
    EXPECT_TRUE(r.trace.empty());
    EXPECT_EQ(r.training_oracle_calls, 0u);
    EXPECT_EQ(r.best_epoch, 0);
    const PromptModel model(cfg.mode, shape_for(cfg, data.train), cfg.encoder_seed);
    EXPECT_EQ(r.best_params, adapter::round_to_checkpoint_precision(
                                 model.initial_params(RngStream(cfg.seed).split(kInitStream).seed(), cfg.init_scale)));
}

TEST(Train, CallAccountingAndDeterminism) {
    auto cfg = small_config();
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto a = train(cfg, data, *oracle, 1);
    ASSERT_TRUE(a.ok()) << a.error;
    EXPECT_EQ(a.batches_per_epoch, 2u);
    EXPECT_EQ(a.trace.size(), 4u);
    EXPECT_EQ(a.training_oracle_calls, 2u * 4u * 4u);
    EXPECT_EQ(a.validation_oracle_calls, 3u * 2u);
    ASSERT_EQ(a.epochs.size(), 3u);
    EXPECT_EQ(a.trace.front().iteration, 0u);

    const auto b = train(cfg, data, *oracle, 2);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_EQ(a.best_val_dice, b.best_val_dice);
    EXPECT_EQ(a.trace, b.trace);

    auto other = cfg;
    other.seed = 1;
    EXPECT_NE(train(other, data, *oracle, 1).trace.front().loss, a.trace.front().loss);
}

TEST(Train, VptTrainsAFullImagePrompt) {
    auto cfg = small_config(Mode::vpt);
    cfg.epochs = 1;
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto r = train(cfg, data, *oracle, 1);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.best_params.size(), 16u * 16u * 3u);
}

TEST(Train, InvalidRequestsRejected) {
    const auto data = load_data(small_config());
    auto oracle = blackbox::make_oracle({});
    EXPECT_THROW(train(small_config(Mode::zeroshot), data, *oracle, 1), ConfigError);
    auto big = small_config();
    big.batch_size = 9;
    EXPECT_THROW(train(big, data, *oracle, 1), ConfigError);
}

TEST(Train, OutputsWritten) {
    auto cfg = small_config();
    cfg.epochs = 1;
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto r = train(cfg, data, *oracle, 1);
    const auto dir = fresh_dir("train_out");
    write_training_outputs(dir, cfg, r);
    for (const char* f : {"config.txt", "trace.csv", "validation.csv", "checkpoint.bin", "train_summary.txt"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(adapter::load_checkpoint((dir / "checkpoint.bin").string()), r.best_params);
    EXPECT_EQ(to_text(load_config((dir / "config.txt").string())), to_text(cfg));
    fs::remove_all(dir);
}

TEST(Evaluate, DeterministicAndCounted) {
    const auto cfg = small_config(Mode::zeroshot);
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto a = evaluate(cfg, data.test, {}, *oracle, 1);
    const auto b = evaluate(cfg, data.test, {}, *oracle, 2);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.rows.size(), 6u);
    EXPECT_EQ(a.oracle_calls, 6u);
    EXPECT_EQ(a.label, "zeroshot");
    EXPECT_EQ(a.dataset_fingerprint, dataset::fingerprint(data.test));
    for (const auto& row : a.rows) {
        EXPECT_GE(row.dice, 0.0);
        EXPECT_LE(row.dice, 1.0);
        EXPECT_GE(row.hd95, 0.0);
    }
}

TEST(Evaluate, TrainedModeNeedsWeights) {
    const auto cfg = small_config(Mode::baps);
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    EXPECT_THROW(evaluate(cfg, data.test, {}, *oracle, 1), ConfigError);
}

TEST(Evaluate, AggregateUsesPopulationStd) {
    EvalReport r;
    r.rows = {{0, 1, 0.5, 2.0}, {0, 2, 0.7, 4.0}, {1, 1, 0.9, 1.0}, {1, 2, 0.9, 1.0}};
    aggregate(r, 2);
    EXPECT_NEAR(r.repeat_dice[0], 0.6, 1e-12);
    EXPECT_NEAR(r.repeat_dice[1], 0.9, 1e-12);
    EXPECT_NEAR(r.dice_mean, 0.75, 1e-12);
    EXPECT_NEAR(r.dice_std, 0.15, 1e-12);
    EXPECT_NEAR(r.hd95_mean, 2.0, 1e-12);
    EXPECT_NEAR(r.hd95_std, 1.0, 1e-12);
    r.rows.pop_back();
    EXPECT_THROW(aggregate(r, 2), DataError);
}

TEST(Report, WriteReadRoundTrip) {
    const auto cfg = small_config(Mode::zeroshot);
    const auto data = load_data(cfg);
    auto oracle = blackbox::make_oracle({});
    const auto r = evaluate(cfg, data.test, {}, *oracle, 1);
    const auto dir = fresh_dir("report");
    write_report(dir, r);
    const auto back = read_report(dir);
    EXPECT_EQ(back.rows, r.rows);
    EXPECT_EQ(back.label, r.label);
    EXPECT_EQ(back.dataset_fingerprint, r.dataset_fingerprint);
    EXPECT_EQ(format_double(back.dice_mean), format_double(r.dice_mean));

    // Tampering with a row no longer matches the summary.
    auto csv = slurp(dir / "report.csv");
    const auto pos = csv.find('\n', csv.find('\n') + 1);
    csv.replace(csv.find('\n') + 1, pos - csv.find('\n') - 1, "0," + std::to_string(r.rows[0].sample_id) + ",0,0");
    std::ofstream(dir / "report.csv", std::ios::binary) << csv;
    EXPECT_THROW(read_report(dir), DataError);
    EXPECT_THROW(read_report(dir / "missing"), DataError);
    fs::remove_all(dir);
}

TEST(Compare, OrdersByModeAndJudgesOrdering) {
    EvalReport zs, vpt, baps;
    zs.mode = Mode::zeroshot;
    vpt.mode = Mode::vpt;
    baps.mode = Mode::baps;
    zs.dice_mean = 0.6;
    vpt.dice_mean = 0.62;
    baps.dice_mean = 0.7;
    auto c = compare({baps, zs, vpt});
    ASSERT_EQ(c.rows.size(), 3u);
    EXPECT_EQ(c.rows[0].mode, Mode::zeroshot);
    EXPECT_EQ(c.rows[2].mode, Mode::baps);
    EXPECT_EQ(c.ordering, Ordering::holds);
    EXPECT_EQ(compare({zs, zs}).ordering, Ordering::tie);
    vpt.dice_mean = 0.5;
    EXPECT_EQ(compare({zs, vpt}).ordering, Ordering::violated);
    EXPECT_NE(comparison_csv(c).find("label,mode,dice_mean,dice_std,hd95_mean,hd95_std\n"), std::string::npos);
}

TEST(Compare, InvalidInputs) {
    EvalReport a, b;
    EXPECT_THROW(compare({a}), ConfigError);
    a.dataset_fingerprint = "x";
    b.dataset_fingerprint = "y";
    EXPECT_THROW(compare({a, b}), DataError);
}

TEST(Subprocess, EvaluationMatchesInProcess) {
    auto cfg = small_config(Mode::baps);
    const auto data = load_data(cfg);
    const PromptModel model(cfg.mode, shape_for(cfg, data.test), cfg.encoder_seed);
    const auto params = adapter::round_to_checkpoint_precision(model.initial_params(5, 0.05));
    auto local = blackbox::make_oracle({});
    blackbox::SubprocessOracle remote({BAPS_CLI_PATH, "blackbox-serve"});
    EXPECT_EQ(evaluate(cfg, data.test, params, *local, 1).rows, evaluate(cfg, data.test, params, remote, 1).rows);
}

TEST(Dependencies, AdapterSideOnlySeesTheOracleInterface) {
    // Harness, adapter and optimizer headers may name the blackbox only
    // through its abstract oracle interface.
    const std::regex forbidden(R"(#include\s+"baps/blackbox/(region_grower|serve|subprocess|wire)\.hpp")");
    int scanned = 0;
    for (const char* sub : {"harness", "adapter", "zoo"})
        for (const auto& entry : fs::recursive_directory_iterator(fs::path(BAPS_SOURCE_DIR) / "include/baps" / sub)) {
            if (!entry.is_regular_file()) continue;
            ++scanned;
            EXPECT_FALSE(std::regex_search(slurp(entry.path()), forbidden)) << entry.path();
        }
    EXPECT_GT(scanned, 10);
}

TEST(Cli, ExitCodes) {
    const auto dir = fresh_dir("cli");
    const std::string small = " --set n_train=8 --set n_val=2 --set n_test=3 --set height=16 --set width=16";
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("train --no-such-flag"), 2);
    EXPECT_EQ(run_cli("train --alpha -1"), 2);
    EXPECT_EQ(run_cli("eval --mode zeroshot --alpha 0.1"), 2);
    EXPECT_EQ(run_cli("eval --mode baps --data-dir " + (dir / "nothing").string()), 2);
    EXPECT_EQ(run_cli("eval --mode zeroshot --data-dir " + (dir / "nothing").string()), 3);
    EXPECT_EQ(run_cli("eval --mode baps --checkpoint " + (dir / "none.bin").string() + small), 3);
    EXPECT_EQ(run_cli("gen-data --out " + (dir / "data").string() + small), 0);
    EXPECT_EQ(run_cli("eval --mode zeroshot --eval-repeats 1 --data-dir " + (dir / "data").string() + " --out " +
                      (dir / "zs").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "zs" / "report.csv"));
    EXPECT_EQ(run_cli("compare " + (dir / "zs").string()), 2);
    EXPECT_EQ(run_cli("compare " + (dir / "zs").string() + " " + (dir / "missing").string()), 3);
    EXPECT_EQ(run_cli("bench-optimizer --function quadratic --dim 2 --iterations 10 --out " + (dir / "b").string()),
              0);
    // An overflowing step makes the parameters non-finite; an overflowing
    // loss is reported as a failed probe.
    EXPECT_EQ(run_cli("bench-optimizer --function quadratic --dim 1 --iterations 5 --alpha 1e308 --start 100 --out " +
                      (dir / "div").string()),
              5);
    EXPECT_EQ(run_cli("bench-optimizer --function quadratic --dim 2 --iterations 5 --alpha 1e300 --out " +
                      (dir / "probe").string()),
              4);
    EXPECT_EQ(run_cli("train --oracle subprocess --set tau=2" + small), 2);
    fs::remove_all(dir);
}
