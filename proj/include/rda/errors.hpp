#pragma once

#include <stdexcept>
#include <string>

namespace rda {

/// Base class for all toolkit errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user input: grid, profile, or config file contents.
struct config_error : error { using error::error; };

/// A model assumption fails (no positive growth anywhere, ambiguous case sign).
struct assumption_error : error { using error::error; };

/// Sign-change bracket for the principal eigenvalue could not be established.
struct bracket_error : error { using error::error; };

/// Newton iteration or time stepping failed to converge, or the field blew up.
struct convergence_error : error { using error::error; };

struct positivity_error : error { using error::error; };

/// Operation invoked for the wrong boundary-condition case.
struct case_error : error { using error::error; };

/// A quantity the theory guarantees nonzero came out numerically zero.
struct degeneracy_error : error { using error::error; };

struct transversality_error : error { using error::error; };

}  // namespace rda
