#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "baps/core/error.hpp"
#include "baps/zoo/types.hpp"

namespace baps::objective {

using zoo::ParamVector;

/// Wraps a loss and counts evaluations. The count is atomic so the wrapped
/// loss may be evaluated from several threads.
template <typename F>
class CountingLoss {
public:
    explicit CountingLoss(F f) : f_(std::move(f)) {}

    double operator()(std::span<const double> phi) {
        count_.fetch_add(1, std::memory_order_relaxed);
        return f_(phi);
    }

    std::uint64_t eval_count() const noexcept { return count_.load(std::memory_order_relaxed); }

private:
    F f_;
    std::atomic<std::uint64_t> count_{0};
};

struct BenchmarkFunction {
    std::string name;
    std::size_t dimension = 0;
    double global_minimum_value = 0.0;
    ParamVector global_minimizer;
    std::function<double(std::span<const double>)> evaluate;

    double operator()(std::span<const double> phi) const {
        if (phi.size() != dimension)
            throw ConfigError(name + ": expected dimension " + std::to_string(dimension) + ", got " +
                              std::to_string(phi.size()));
        return evaluate(phi);
    }
};

/// sum_j phi_j^2
inline BenchmarkFunction quadratic(std::size_t d) {
    if (d < 1) throw ConfigError("quadratic: dimension must be >= 1");
    return {"quadratic", d, 0.0, ParamVector(d, 0.0), [](std::span<const double> phi) {
                double s = 0.0;
                for (double x : phi) s += x * x;
                return s;
            }};
}

/// 100 (phi_1 - phi_0^2)^2 + (1 - phi_0)^2, two-dimensional only.
inline BenchmarkFunction rosenbrock(std::size_t d = 2) {
    if (d != 2) throw ConfigError("rosenbrock: only dimension 2 is supported");
    return {"rosenbrock", 2, 0.0, ParamVector{1.0, 1.0}, [](std::span<const double> phi) {
                const double a = phi[1] - phi[0] * phi[0];
                const double b = 1.0 - phi[0];
                return 100.0 * a * a + b * b;
            }};
}

/// Rastrigin form: sum_j phi_j^2 + A (1 - cos(2 pi phi_j)), A = 10.
/// Local minima sit close to every integer lattice point.
inline BenchmarkFunction multimodal_basin(std::size_t d) {
    if (d < 1) throw ConfigError("multimodal_basin: dimension must be >= 1");
    constexpr double A = 10.0;
    return {"rastrigin", d, 0.0, ParamVector(d, 0.0), [](std::span<const double> phi) {
                double s = 0.0;
                for (double x : phi) s += x * x + A * (1.0 - std::cos(2.0 * std::numbers::pi * x));
                return s;
            }};
}

/// Accepts the CLI spellings: quadratic, rosenbrock, rastrigin (alias multimodal).
inline BenchmarkFunction benchmark_by_name(const std::string& name, std::size_t d) {
    if (name == "quadratic") return quadratic(d);
    if (name == "rosenbrock") return rosenbrock(d);
    if (name == "rastrigin" || name == "multimodal") return multimodal_basin(d);
    throw ConfigError("unknown benchmark function '" + name + "'");
}

/// Central finite differences; test and diagnostics helper.
template <typename F>
ParamVector central_difference(F&& f, std::span<const double> phi, double h) {
    ParamVector x(phi.begin(), phi.end());
    ParamVector g(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double saved = x[j];
        x[j] = saved + h;
        const double up = f(std::span<const double>(x));
        x[j] = saved - h;
        const double down = f(std::span<const double>(x));
        x[j] = saved;
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace baps::objective
