#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "baps/core/error.hpp"

namespace baps::zoo {

/// Flat vector of every trainable parameter.
using ParamVector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Anything callable as `double(std::span<const double>)`.
template <typename F>
concept ScalarLoss = requires(F& f, std::span<const double> phi) {
    { f(phi) } -> std::convertible_to<double>;
};

/// Random direction used by the two-sided estimate. Every entry has
/// magnitude in [0.5, 1], so the element-wise inverse is bounded by 2.
class Perturbation {
public:
    static Perturbation from_values(std::vector<double> values) {
        if (values.empty()) throw ConfigError("perturbation must have dimension >= 1");
        for (double e : values) {
            const double a = std::abs(e);
            if (!(a >= 0.5 && a <= 1.0))
                throw ConfigError("perturbation entries must satisfy 0.5 <= |e| <= 1");
        }
        return Perturbation(std::move(values));
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const noexcept { return values_[j]; }

private:
    explicit Perturbation(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

struct GradientEstimate {
    std::vector<double> values;
    double rms_magnitude = 0.0;
    // The two probe losses; their mean is the loss reported in traces.
    double loss_plus = 0.0;
    double loss_minus = 0.0;

    double probe_mean() const noexcept { return 0.5 * (loss_plus + loss_minus); }
};

inline double rms(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss / static_cast<double>(v.size()));
}

struct OptimizerState {
    std::uint64_t iteration = 0;
    ParamVector momentum;
    int strike = 0;
    int cooldown_remaining = 0;
    bool boost_active = false;

    static OptimizerState initial(std::size_t d) {
        OptimizerState s;
        s.momentum.assign(d, 0.0);
        return s;
    }

    friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

struct ZooHyperparams {
    double c = 0.01;
    double alpha = 0.01;
    double beta = 0.9;
    int k1 = 3;
    int cooldown = 2;
    double eta1 = 100.0;
    double eta2 = 100.0;
    double grad_threshold = 1e-3;

    void validate() const {
        if (!(c > 0.0 && c <= 1.0)) throw ConfigError("c must lie in (0, 1]");
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
        if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
        if (k1 < 1) throw ConfigError("k1 must be a positive integer");
        if (cooldown < 1) throw ConfigError("cooldown must be a positive integer");
        if (!(eta1 > 0.0) || !std::isfinite(eta1)) throw ConfigError("eta1 must be positive");
        if (!(eta2 > 0.0) || !std::isfinite(eta2)) throw ConfigError("eta2 must be positive");
        if (!(grad_threshold >= 0.0) || !std::isfinite(grad_threshold))
            throw ConfigError("grad_threshold must be nonnegative");
    }
};

enum class Variant { spsa, spsa_gc, spsa_geass };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::spsa: return "spsa";
        case Variant::spsa_gc: return "spsa-gc";
        case Variant::spsa_geass: return "spsa-geass";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "spsa") return Variant::spsa;
    if (s == "spsa-gc") return Variant::spsa_gc;
    if (s == "spsa-geass") return Variant::spsa_geass;
    throw ConfigError("unknown optimizer '" + s + "' (expected spsa, spsa-gc or spsa-geass)");
}

}  // namespace baps::zoo
