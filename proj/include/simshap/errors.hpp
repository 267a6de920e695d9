#pragma once

#include <stdexcept>
#include <string>

namespace simshap {

// A linear system that the caller asked to solve exactly (no regularization)
// turned out rank-deficient. Callers decide whether a jitter retry is
// appropriate; the solver itself never regularizes silently.
struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or a diverging iteration; aborts the run with context.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input: files, flags, or configurations that cannot be run.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace simshap
