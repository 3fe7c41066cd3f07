/// @file errors.hpp
/// @brief Error type carrying a stable machine-readable failure code.
#pragma once

#include <stdexcept>
#include <string>

namespace henon {

/// Thrown by solvers and validators. `code()` is a stable identifier
/// (e.g. "no-convergence", "bracket-failed") suitable for dispatch;
/// `what()` adds human-readable context.
class solver_error : public std::runtime_error {
public:
    solver_error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace henon
