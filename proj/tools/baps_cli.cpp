// baps: data generation, training, evaluation, comparison, optimizer
// benchmarks and the standalone segmenter server.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "baps/adapter/checkpoint.hpp"
#include "baps/blackbox/region_grower.hpp"
#include "baps/blackbox/serve.hpp"
#include "baps/blackbox/subprocess.hpp"
#include "baps/core/error.hpp"
#include "baps/dataset/io.hpp"
#include "baps/harness/compare.hpp"
#include "baps/harness/config.hpp"
#include "baps/harness/data.hpp"
#include "baps/harness/evaluate.hpp"
#include "baps/harness/train.hpp"
#include "baps/objective/benchmarks.hpp"
#include "baps/zoo/spsa.hpp"
#include "baps/zoo/trace_csv.hpp"

namespace fs = std::filesystem;
using namespace baps;

namespace {

// Flag name -> config key for the run-configuration flags.
const std::vector<std::pair<std::string, std::string>> kRunFlags = {
    {"--mode", "mode"},           {"--optimizer", "optimizer"},
    {"--alpha", "alpha"},         {"--c", "c"},
    {"--beta", "beta"},           {"--k1", "k1"},
    {"--cooldown", "cooldown"},   {"--eta1", "eta1"},
    {"--eta2", "eta2"},           {"--grad-threshold", "grad_threshold"},
    {"--batch-size", "batch_size"}, {"--epochs", "epochs"},
    {"--seed", "seed"},           {"--out", "out"},
    {"--eval-repeats", "eval_repeats"}, {"--data-dir", "data_dir"},
    {"--oracle", "oracle"},
};

struct RunOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--config", o.config_file, "key = value configuration file");
    cmd->add_option("--set", o.overrides, "override any config key (key=value), repeatable");
    for (const auto& [flag, key] : kRunFlags) o.options[key] = cmd->add_option(flag, o.flags[key], "config key " + key);
}

// Config file, then --set overrides, then named flags.
harness::RunConfig resolve(const RunOptions& o) {
    harness::RunConfig cfg;
    if (!o.config_file.empty()) cfg = harness::load_config(o.config_file);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        harness::set_config_value(cfg, harness::detail::trim(kv.substr(0, eq)), harness::detail::trim(kv.substr(eq + 1)));
    }
    for (const auto& [flag, key] : kRunFlags)
        if (o.options.at(key)->count() > 0) harness::set_config_value(cfg, key, o.flags.at(key));
    cfg.validate();
    return cfg;
}

blackbox::GrowerParams grower_params(const harness::SimulatorSettings& s) {
    return {s.tau, s.sigma, s.connectivity};
}

std::unique_ptr<blackbox::BlackboxOracle> build_oracle(const harness::RunConfig& cfg) {
    const auto params = grower_params(cfg.grower);
    if (cfg.oracle == harness::OracleMode::in_process) return blackbox::make_oracle(params);
    const auto self = fs::read_symlink("/proc/self/exe").string();
    return std::make_unique<blackbox::SubprocessOracle>(std::vector<std::string>{
        self, "blackbox-serve", "--tau", format_double(params.tau), "--sigma", format_double(params.sigma),
        "--connectivity", std::to_string(params.connectivity)});
}

int cmd_gen_data(const RunOptions& o) {
    auto cfg = resolve(o);
    // --seed selects the dataset seed here.
    if (o.options.at("seed")->count() > 0) cfg.data.seed = cfg.seed;
    const auto ds = dataset::generate(cfg.data);
    dataset::save_dataset(cfg.out, ds);
    std::ofstream info(fs::path(cfg.out) / "dataset.txt", std::ios::binary);
    info << "data_seed = " << cfg.data.seed << '\n'
         << "train = " << ds.train.size() << ' ' << dataset::fingerprint(ds.train) << '\n'
         << "val = " << ds.val.size() << ' ' << dataset::fingerprint(ds.val) << '\n'
         << "test = " << ds.test.size() << ' ' << dataset::fingerprint(ds.test) << '\n';
    std::cout << "wrote " << ds.train.size() << '/' << ds.val.size() << '/' << ds.test.size() << " samples to "
              << cfg.out << '\n';
    return 0;
}

int cmd_train(const RunOptions& o) {
    const auto cfg = resolve(o);
    const auto data = harness::load_data(cfg);
    auto oracle = build_oracle(cfg);
    const auto result = harness::train(cfg, data, *oracle);
    harness::write_training_outputs(cfg.out, cfg, result);
    std::cout << harness::run_label(cfg) << ": " << result.trace.size() << " iterations, best val Dice "
              << format_double(result.best_val_dice) << " at epoch " << result.best_epoch << '\n';
    if (!result.ok()) {
        std::cerr << "error: " << result.error << " (best checkpoint kept)\n";
        return exit_code(*result.error_category);
    }
    return 0;
}

int cmd_eval(const RunOptions& o, const std::string& checkpoint) {
    const auto cfg = resolve(o);
    zoo::ParamVector params;
    if (cfg.mode != harness::Mode::zeroshot) {
        if (checkpoint.empty()) throw ConfigError("mode=" + to_string(cfg.mode) + " needs --checkpoint");
        params = adapter::load_checkpoint(checkpoint);
    }
    const auto data = harness::load_data(cfg);
    auto oracle = build_oracle(cfg);
    const auto report = harness::evaluate(cfg, data.test, params, *oracle);
    harness::write_report(cfg.out, report);
    std::cout << report.label << ": Dice " << format_double(report.dice_mean) << " +- "
              << format_double(report.dice_std) << ", HD95 " << format_double(report.hd95_mean) << '\n';
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out) {
    std::vector<harness::EvalReport> reports;
    for (const auto& d : dirs) reports.push_back(harness::read_report(d));
    const auto c = harness::compare(reports);
    harness::write_comparison(out, c);
    std::cout << harness::comparison_text(c);
    return 0;
}

struct BenchOptions {
    std::string function = "rastrigin";
    std::size_t dim = 4;
    std::string optimizer = "spsa-geass";
    std::vector<double> start;
    std::uint64_t iterations = 2000;
    std::uint64_t seed = 0;
    std::string out = "bench";
    zoo::ZooHyperparams hp;
};

int cmd_bench(const BenchOptions& b) {
    const auto f = objective::benchmark_by_name(b.function, b.dim);
    zoo::ParamVector phi0 = b.start;
    if (phi0.empty()) {
        phi0.assign(f.dimension, 1.0);
        if (f.name == "rosenbrock") phi0 = {-1.2, 1.0};
    }
    if (phi0.size() == 1 && f.dimension > 1) phi0.assign(f.dimension, phi0[0]);
    if (phi0.size() != f.dimension) throw ConfigError("--start has the wrong dimension");
    const auto run = zoo::run_optimizer(zoo::parse_variant(b.optimizer), f, phi0, b.hp, b.iterations, RngStream(b.seed));
    fs::create_directories(b.out);
    zoo::write_trace_csv((fs::path(b.out) / "trace.csv").string(), run.trace);
    std::ofstream res(fs::path(b.out) / "result.txt", std::ios::binary);
    res << "function = " << f.name << "\noptimizer = " << b.optimizer << "\niterations = " << run.trace.size()
        << "\nfinal_loss = " << format_double(f(run.phi)) << "\nphi =";
    for (double v : run.phi) res << ' ' << format_double(v);
    res << "\nstatus = " << (run.ok() ? "ok" : "error") << '\n';
    std::cout << f.name << " " << b.optimizer << ": final loss " << format_double(f(run.phi)) << '\n';
    if (!run.ok()) {
        std::cerr << "error: " << run.error << '\n';
        return exit_code(*run.error_category);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-order blackbox prompt adaptation toolkit"};
    app.require_subcommand(1);

    RunOptions gen_o, train_o, eval_o;
    add_run_options(app.add_subcommand("gen-data", "generate the synthetic dataset into --out"), gen_o);
    add_run_options(app.add_subcommand("train", "train a visual prompt or IP-Decoder"), train_o);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate on the test split");
    add_run_options(eval_cmd, eval_o);
    std::string checkpoint;
    eval_cmd->add_option("--checkpoint", checkpoint, "weights file (not used by zeroshot)");

    auto* cmp = app.add_subcommand("compare", "compare evaluation report directories");
    std::vector<std::string> report_dirs;
    std::string cmp_out = "comparison";
    cmp->add_option("reports", report_dirs, "report directories")->required();
    cmp->add_option("--out", cmp_out, "output directory");

    auto* bench = app.add_subcommand("bench-optimizer", "run an optimizer on a benchmark function");
    BenchOptions b;
    bench->add_option("--function", b.function, "quadratic, rosenbrock or rastrigin");
    bench->add_option("--dim", b.dim, "dimension");
    bench->add_option("--optimizer", b.optimizer, "spsa, spsa-gc or spsa-geass");
    bench->add_option("--start", b.start, "initial point (one value is broadcast)")->delimiter(',');
    bench->add_option("--iterations", b.iterations, "iteration budget");
    bench->add_option("--seed", b.seed, "random seed");
    bench->add_option("--out", b.out, "output directory");
    bench->add_option("--alpha", b.hp.alpha);
    bench->add_option("--c", b.hp.c);
    bench->add_option("--beta", b.hp.beta);
    bench->add_option("--k1", b.hp.k1);
    bench->add_option("--cooldown", b.hp.cooldown);
    bench->add_option("--eta1", b.hp.eta1);
    bench->add_option("--eta2", b.hp.eta2);
    bench->add_option("--grad-threshold", b.hp.grad_threshold);

    auto* serve = app.add_subcommand("blackbox-serve", "serve the simulated segmenter on stdin/stdout");
    blackbox::GrowerParams gp;
    serve->add_option("--tau", gp.tau);
    serve->add_option("--sigma", gp.sigma);
    serve->add_option("--connectivity", gp.connectivity);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code(ErrorCategory::config);
    }

    try {
        if (app.got_subcommand("gen-data")) return cmd_gen_data(gen_o);
        if (app.got_subcommand("train")) return cmd_train(train_o);
        if (app.got_subcommand("eval")) return cmd_eval(eval_o, checkpoint);
        if (app.got_subcommand("compare")) return cmd_compare(report_dirs, cmp_out);
        if (app.got_subcommand("bench-optimizer")) return cmd_bench(b);
        if (app.got_subcommand("blackbox-serve")) {
            gp.validate();
            blackbox::serve(STDIN_FILENO, STDOUT_FILENO, gp);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(ErrorCategory::data);
    }
    return 0;
}
