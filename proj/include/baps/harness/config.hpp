#pragma once

// Run configuration and its flat text form: one `key = value` per line,
// `#` starts a comment. Every key has a fixed type (see config_fields()).

#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "baps/core/error.hpp"
#include "baps/core/format.hpp"
#include "baps/dataset/generator.hpp"
#include "baps/harness/model.hpp"
#include "baps/zoo/types.hpp"

namespace baps::harness {

enum class OracleMode { in_process, subprocess };

/// Settings forwarded to the simulated segmenter when the CLI builds it. The
/// harness itself only ever sees the oracle interface.
struct SimulatorSettings {
    double tau = 0.15;
    double sigma = 1.0;
    int connectivity = 4;

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
        if (!(sigma >= 0.0 && sigma < 1e6)) throw ConfigError("sigma must be nonnegative");
        if (connectivity != 4 && connectivity != 8) throw ConfigError("connectivity must be 4 or 8");
    }
};

struct RunConfig {
    Mode mode = Mode::baps;
    zoo::Variant optimizer = zoo::Variant::spsa_geass;
    zoo::ZooHyperparams zoo;
    dataset::DatasetSpec data;
    std::string data_dir;  // empty: generate from `data`
    int batch_size = 32;
    int epochs = 30;
    int eval_repeats = 3;
    int val_prompts = 5;  // point prompts per validation sample
    std::uint64_t seed = 0;
    std::uint64_t encoder_seed = 0;
    std::uint64_t eval_seed = 0;
    SimulatorSettings grower;
    ModelShape shape;
    double init_scale = 0.01;
    bool augment = true;
    OracleMode oracle = OracleMode::in_process;
    std::string out = "out";

    // Keys given explicitly by the user (file or CLI); used for validation.
    std::set<std::string> explicit_keys;

    void validate() const;
};

struct ConfigField {
    const char* key;
    const char* type;
    bool optimizer_setting;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

namespace detail {

inline int to_int(const std::string& v, const std::string& key) {
    const auto i = parse_int(v, key);
    if (i < INT32_MIN || i > INT32_MAX) throw ConfigError(key + ": out of range");
    return static_cast<int>(i);
}

inline std::uint64_t to_u64(const std::string& v, const std::string& key) {
    const auto i = parse_int(v, key);
    if (i < 0) throw ConfigError(key + ": must be nonnegative");
    return static_cast<std::uint64_t>(i);
}

inline bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

#define BAPS_DOUBLE_FIELD(KEY, MEMBER, OPT)                                                        \
    ConfigField{KEY, "real", OPT, [](const RunConfig& c) { return format_double(c.MEMBER); },       \
                [](RunConfig& c, const std::string& v) { c.MEMBER = parse_double(v, KEY); }}
#define BAPS_INT_FIELD(KEY, MEMBER, OPT)                                                           \
    ConfigField{KEY, "int", OPT, [](const RunConfig& c) { return std::to_string(c.MEMBER); },       \
                [](RunConfig& c, const std::string& v) { c.MEMBER = detail::to_int(v, KEY); }}
#define BAPS_U64_FIELD(KEY, MEMBER)                                                                \
    ConfigField{KEY, "uint", false, [](const RunConfig& c) { return std::to_string(c.MEMBER); },    \
                [](RunConfig& c, const std::string& v) { c.MEMBER = detail::to_u64(v, KEY); }}

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = {
        {"mode", "enum", false, [](const RunConfig& c) { return to_string(c.mode); },
         [](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
        {"optimizer", "enum", true, [](const RunConfig& c) { return zoo::to_string(c.optimizer); },
         [](RunConfig& c, const std::string& v) { c.optimizer = zoo::parse_variant(v); }},
        BAPS_DOUBLE_FIELD("c", zoo.c, true),
        BAPS_DOUBLE_FIELD("alpha", zoo.alpha, true),
        BAPS_DOUBLE_FIELD("beta", zoo.beta, true),
        BAPS_INT_FIELD("k1", zoo.k1, true),
        BAPS_INT_FIELD("cooldown", zoo.cooldown, true),
        BAPS_DOUBLE_FIELD("eta1", zoo.eta1, true),
        BAPS_DOUBLE_FIELD("eta2", zoo.eta2, true),
        BAPS_DOUBLE_FIELD("grad_threshold", zoo.grad_threshold, true),
        BAPS_INT_FIELD("batch_size", batch_size, false),
        BAPS_INT_FIELD("epochs", epochs, false),
        BAPS_INT_FIELD("eval_repeats", eval_repeats, false),
        BAPS_INT_FIELD("val_prompts", val_prompts, false),
        BAPS_U64_FIELD("seed", seed),
        BAPS_U64_FIELD("encoder_seed", encoder_seed),
        BAPS_U64_FIELD("eval_seed", eval_seed),
        {"data_dir", "path", false, [](const RunConfig& c) { return c.data_dir; },
         [](RunConfig& c, const std::string& v) { c.data_dir = v; }},
        BAPS_INT_FIELD("n_train", data.n_train, false),
        BAPS_INT_FIELD("n_val", data.n_val, false),
        BAPS_INT_FIELD("n_test", data.n_test, false),
        BAPS_INT_FIELD("height", data.height, false),
        BAPS_INT_FIELD("width", data.width, false),
        BAPS_INT_FIELD("channels", data.channels, false),
        BAPS_DOUBLE_FIELD("noise_std", data.noise_std, false),
        BAPS_DOUBLE_FIELD("ramp_strength", data.ramp_strength, false),
        BAPS_U64_FIELD("data_seed", data.seed),
        BAPS_DOUBLE_FIELD("tau", grower.tau, false),
        BAPS_DOUBLE_FIELD("sigma", grower.sigma, false),
        BAPS_INT_FIELD("connectivity", grower.connectivity, false),
        {"gamma", "real", false, [](const RunConfig& c) { return format_double(c.shape.gamma); },
         [](RunConfig& c, const std::string& v) { c.shape.gamma = static_cast<float>(parse_double(v, "gamma")); }},
        BAPS_INT_FIELD("prompt_dim", shape.prompt_dim, false),
        BAPS_INT_FIELD("image_features", shape.image_features, false),
        BAPS_INT_FIELD("hidden1", shape.hidden1, false),
        BAPS_INT_FIELD("hidden2", shape.hidden2, false),
        BAPS_DOUBLE_FIELD("init_scale", init_scale, false),
        {"augment", "bool", false, [](const RunConfig& c) { return std::string(c.augment ? "true" : "false"); },
         [](RunConfig& c, const std::string& v) { c.augment = detail::to_bool(v, "augment"); }},
        {"oracle", "enum", false,
         [](const RunConfig& c) { return std::string(c.oracle == OracleMode::subprocess ? "subprocess" : "in-process"); },
         [](RunConfig& c, const std::string& v) {
             if (v == "in-process") c.oracle = OracleMode::in_process;
             else if (v == "subprocess") c.oracle = OracleMode::subprocess;
             else throw ConfigError("oracle: expected in-process or subprocess, got '" + v + "'");
         }},
        {"out", "path", false, [](const RunConfig& c) { return c.out; },
         [](RunConfig& c, const std::string& v) { c.out = v; }},
    };
    return fields;
}

#undef BAPS_DOUBLE_FIELD
#undef BAPS_INT_FIELD
#undef BAPS_U64_FIELD

inline const ConfigField& find_field(const std::string& key) {
    for (const auto& f : config_fields())
        if (key == f.key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

/// Sets a key and records it as explicitly given.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    find_field(key).set(cfg, value);
    cfg.explicit_keys.insert(key);
}

inline void RunConfig::validate() const {
    if (mode == Mode::zeroshot) {
        for (const auto& f : config_fields())
            if (f.optimizer_setting && explicit_keys.count(f.key))
                throw ConfigError(std::string("mode=zeroshot takes no optimizer settings, but '") + f.key + "' was given");
    } else {
        zoo.validate();
    }
    data.validate();
    grower.validate();
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (eval_repeats < 1) throw ConfigError("eval_repeats must be >= 1");
    if (val_prompts < 1) throw ConfigError("val_prompts must be >= 1");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be nonnegative");
    if (!(shape.gamma > 0.0f)) throw ConfigError("gamma must be positive");
    if (shape.prompt_dim <= 0 || shape.prompt_dim % 2 != 0) throw ConfigError("prompt_dim must be even and positive");
    if (shape.prompt_dim % 4 != 0) throw ConfigError("prompt_dim must be a multiple of 4");
}

/// Serialized form. Zeroshot configs omit optimizer keys so that reloading
/// them passes validation. `include_out` false gives the fingerprint text.
inline std::string to_text(const RunConfig& cfg, bool include_out = true) {
    std::ostringstream os;
    for (const auto& f : config_fields()) {
        if (cfg.mode == Mode::zeroshot && f.optimizer_setting) continue;
        if (!include_out && std::string(f.key) == "out") continue;
        os << f.key << " = " << f.get(cfg) << '\n';
    }
    return os.str();
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

inline void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write config file " + path);
    out << to_text(cfg);
}

inline std::string config_fingerprint(const RunConfig& cfg) {
    Fnv1a h;
    h.update(to_text(cfg, false));
    return h.hex();
}

}  // namespace baps::harness
