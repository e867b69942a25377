#pragma once

// Two-sided simultaneous-perturbation optimizers: plain SPSA, SPSA with
// Nesterov-style momentum (SPSA-GC), and SPSA-GC with the strike/cooldown
// boost that temporarily scales the step and probe sizes (SPSA-GEASS).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "baps/core/error.hpp"
#include "baps/core/random.hpp"
#include "baps/zoo/types.hpp"

namespace baps::zoo {

/// Raised when the loss returns a non-finite value; carries the probe point.
class ProbeFailure : public OracleError {
public:
    ProbeFailure(const std::string& what, ParamVector probe)
        : OracleError(what), probe_(std::move(probe)) {}
    const ParamVector& probe() const noexcept { return probe_; }

private:
    ParamVector probe_;
};

/// Draws d entries uniformly from [-1, -0.5] U [0.5, 1]: a fair sign, then a
/// magnitude uniform on [0.5, 1].
inline Perturbation sample_perturbation(std::size_t d, RngStream& rng) {
    if (d == 0) throw ConfigError("sample_perturbation: dimension must be >= 1");
    std::vector<double> v(d);
    for (auto& e : v) {
        const bool negative = rng.coin();
        const double magnitude = 0.5 + 0.5 * rng.uniform();
        e = negative ? -magnitude : magnitude;
    }
    return Perturbation::from_values(std::move(v));
}

/// ghat_j = (L(phi + c*delta) - L(phi - c*delta)) / (2c) / delta_j.
/// Exactly two loss evaluations, plus side first.
template <ScalarLoss Loss>
GradientEstimate spsa_estimate(Loss&& loss, std::span<const double> phi, double c_eff,
                               const Perturbation& delta) {
    if (!(c_eff > 0.0)) throw ConfigError("spsa_estimate: c_eff must be positive");
    const std::size_t d = phi.size();
    if (delta.size() != d) throw ConfigError("spsa_estimate: perturbation/parameter size mismatch");

    ParamVector plus(d), minus(d);
    for (std::size_t j = 0; j < d; ++j) {
        plus[j] = phi[j] + c_eff * delta[j];
        minus[j] = phi[j] - c_eff * delta[j];
    }
    GradientEstimate g;
    g.loss_plus = static_cast<double>(loss(std::span<const double>(plus)));
    if (!std::isfinite(g.loss_plus)) throw ProbeFailure("loss is non-finite at the + probe", std::move(plus));
    g.loss_minus = static_cast<double>(loss(std::span<const double>(minus)));
    if (!std::isfinite(g.loss_minus)) throw ProbeFailure("loss is non-finite at the - probe", std::move(minus));

    const double scale = (g.loss_plus - g.loss_minus) / (2.0 * c_eff);
    g.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) g.values[j] = scale / delta[j];
    g.rms_magnitude = rms(g.values);
    return g;
}

struct StepResult {
    ParamVector phi;
    OptimizerState state;
    GradientEstimate grad;
};

/// phi' = phi - alpha * ghat(phi). Momentum is untouched.
template <ScalarLoss Loss>
StepResult spsa_step(Loss&& loss, std::span<const double> phi, const OptimizerState& state,
                     const ZooHyperparams& hp, RngStream& rng) {
    const Perturbation delta = sample_perturbation(phi.size(), rng);
    StepResult r{ParamVector(phi.begin(), phi.end()), state, spsa_estimate(loss, phi, hp.c, delta)};
    for (std::size_t j = 0; j < r.phi.size(); ++j) r.phi[j] = phi[j] - hp.alpha * r.grad.values[j];
    ++r.state.iteration;
    return r;
}

/// m' = beta*m - alpha_eff * ghat(phi + beta*m), phi' = phi + m'.
/// The estimate is taken at the lookahead point with probe size c_eff.
template <ScalarLoss Loss>
StepResult spsa_gc_step(Loss&& loss, std::span<const double> phi, const OptimizerState& state,
                        const ZooHyperparams& hp, double alpha_eff, double c_eff, RngStream& rng) {
    if (!(alpha_eff > 0.0)) throw ConfigError("spsa_gc_step: alpha_eff must be positive");
    const std::size_t d = phi.size();
    if (state.momentum.size() != d) throw ConfigError("spsa_gc_step: momentum buffer has wrong size");

    ParamVector lookahead(d);
    for (std::size_t j = 0; j < d; ++j) lookahead[j] = phi[j] + hp.beta * state.momentum[j];

    const Perturbation delta = sample_perturbation(d, rng);
    StepResult r{ParamVector(d), state, spsa_estimate(loss, lookahead, c_eff, delta)};
    for (std::size_t j = 0; j < d; ++j) {
        r.state.momentum[j] = hp.beta * state.momentum[j] - alpha_eff * r.grad.values[j];
        r.phi[j] = phi[j] + r.state.momentum[j];
    }
    ++r.state.iteration;
    return r;
}

struct GeassDecision {
    OptimizerState state;
    double alpha_eff;
    double c_eff;
};

/// Strike/cooldown state machine. While a boost is active the gradient is
/// ignored and the cooldown counts down; otherwise a gradient whose RMS is
/// strictly below the threshold adds a strike, anything else clears them.
/// Reaching k1 strikes starts a boost of `cooldown` iterations. The returned
/// step sizes reflect the state after the transition, so exactly `cooldown`
/// consecutive calls return (alpha*eta1, c*eta2).
inline GeassDecision geass_update(OptimizerState state, double grad_rms, const ZooHyperparams& hp) {
    if (state.boost_active) {
        --state.cooldown_remaining;
        if (state.cooldown_remaining <= 0) {
            state.cooldown_remaining = 0;
            state.boost_active = false;
        }
    } else if (grad_rms < hp.grad_threshold) {
        ++state.strike;
        if (state.strike >= hp.k1) {
            state.boost_active = true;
            state.cooldown_remaining = hp.cooldown;
            state.strike = 0;
        }
    } else {
        state.strike = 0;
    }
    if (state.boost_active) return {std::move(state), hp.alpha * hp.eta1, hp.c * hp.eta2};
    return {std::move(state), hp.alpha, hp.c};
}

inline GeassDecision geass_update(OptimizerState state, const GradientEstimate& grad,
                                  const ZooHyperparams& hp) {
    return geass_update(std::move(state), grad.rms_magnitude, hp);
}

struct TraceRow {
    std::uint64_t iteration = 0;
    double loss = 0.0;  // mean of the two probe losses
    double grad_rms = 0.0;
    double alpha_eff = 0.0;
    double c_eff = 0.0;
    int strike = 0;
    bool boost_active = false;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct OptimizerRun {
    ParamVector phi;  // last finite iterate
    OptimizerState state;
    std::vector<TraceRow> trace;
    std::optional<ErrorCategory> error_category;
    std::string error;

    bool ok() const noexcept { return !error_category.has_value(); }
};

/// Called after every completed iteration with the new iterate; return false
/// to stop early.
using IterationObserver = std::function<bool(const TraceRow&, std::span<const double>)>;

/// Runs `budget` iterations (fewer if the observer stops early or the loss
/// fails). Iteration i draws its perturbation from rng.split(i). For
/// SPSA-GEASS the boost decision at iteration i uses the estimate from
/// iteration i-1; iteration 0 uses the base step sizes. Each iteration costs
/// exactly two loss evaluations.
template <ScalarLoss Loss>
OptimizerRun run_optimizer(Variant variant, Loss&& loss, ParamVector phi0, const ZooHyperparams& hp,
                           std::uint64_t budget, const RngStream& rng,
                           const IterationObserver& observer = {}) {
    hp.validate();
    if (budget < 1) throw ConfigError("run_optimizer: budget must be >= 1");
    if (phi0.empty()) throw ConfigError("run_optimizer: parameter vector must have dimension >= 1");
    if (!all_finite(phi0)) throw ConfigError("run_optimizer: initial parameters must be finite");

    OptimizerRun run;
    run.state = OptimizerState::initial(phi0.size());
    run.phi = std::move(phi0);
    run.trace.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(budget, 1u << 20)));

    std::optional<double> previous_rms;
    for (std::uint64_t i = 0; i < budget; ++i) {
        RngStream draw = rng.split(i);
        double alpha_eff = hp.alpha;
        double c_eff = hp.c;
        OptimizerState state = run.state;
        if (variant == Variant::spsa_geass && previous_rms) {
            auto decision = geass_update(std::move(state), *previous_rms, hp);
            state = std::move(decision.state);
            alpha_eff = decision.alpha_eff;
            c_eff = decision.c_eff;
        }

        StepResult step;
        try {
            step = variant == Variant::spsa ? spsa_step(loss, run.phi, state, hp, draw)
                                            : spsa_gc_step(loss, run.phi, state, hp, alpha_eff, c_eff, draw);
        } catch (const Error& e) {
            run.error_category = e.category();
            run.error = "iteration " + std::to_string(i) + ": " + e.what();
            return run;
        }
        if (!all_finite(step.phi) || !all_finite(step.state.momentum)) {
            run.error_category = ErrorCategory::divergence;
            run.error = "iteration " + std::to_string(i) + ": parameters became non-finite";
            return run;
        }

        TraceRow row{i, step.grad.probe_mean(), step.grad.rms_magnitude, alpha_eff, c_eff,
                     step.state.strike, step.state.boost_active};
        previous_rms = step.grad.rms_magnitude;
        run.phi = std::move(step.phi);
        run.state = std::move(step.state);
        run.trace.push_back(row);
        if (observer && !observer(row, run.phi)) break;
    }
    return run;
}

}  // namespace baps::zoo
