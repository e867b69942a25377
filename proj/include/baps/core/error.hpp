#pragma once

#include <stdexcept>
#include <string>

namespace baps {

/// Failure categories. The CLI maps each one to its own exit code.
enum class ErrorCategory { config, data, oracle, divergence };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Bad hyperparameters, shapes, dimensions or CLI/config values.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Malformed or inconsistent dataset, checkpoint, or report files.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// The loss oracle or the blackbox model returned something unusable.
class OracleError : public Error {
public:
    explicit OracleError(const std::string& what) : Error(ErrorCategory::oracle, what) {}
};

/// Parameters became non-finite during optimization.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorCategory::divergence, what) {}
};

inline int exit_code(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::data: return 3;
        case ErrorCategory::oracle: return 4;
        case ErrorCategory::divergence: return 5;
    }
    return 1;
}

}  // namespace baps
